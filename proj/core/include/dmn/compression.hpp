// Network simplification: child reordering by weight, collapse of
// single-child parents into the surviving child's angle, and similarity
// merging of sibling subtrees.
#pragma once

#include "dmn/network.hpp"

namespace dmn {

// Swap children (with their whole subtrees) so the heavier child comes
// first at every internal node. Forward output unchanged.
void reorder(MaterialNetwork& net);

// Collapse every block with a single live child: theta of the survivor
// absorbs the parent's, parent angle reset to zero. Output-preserving.
void delete_pass_through(MaterialNetwork& net);

// Merge sibling subtrees whose positional signatures differ by at most
// tol_f in volume fraction and tol_theta in angle (angle distance mod pi,
// normalized by pi): weights summed into the first subtree, angles
// averaged, the second deactivated; a deletion pass runs afterwards.
// Returns the number of merges performed.
int merge_similar_subtrees(MaterialNetwork& net, double tol_f, double tol_theta);

}  // namespace dmn
