#pragma once

// Shared worked-example fixtures. Expected numbers for the four-variable
// chain/fork model were computed by hand from the structural equations
// (X1 <- 2 X4, X2 <- 3 X1, X3 <- 2 X2 + X4, unit noise variances):
//
//            X1    X2    X3   X4
//   X1        5    15    32    2
//   X2       15    46    98    6
//   X3       32    98   210   13
//   X4        2     6    13    1
//
// Regressing X3 on (X1, X4) gives coefficients (6, 1); on X1 alone 32/5 = 6.4;
// on (X1, X2) the X1 coefficient is 2/5 = 0.4.

#include "causalkit/sem.hpp"

namespace causalkit::fixtures {

inline Dag four_node_dag() {
    Dag g({"X1", "X2", "X3", "X4"});
    g.add_edge("X4", "X1");
    g.add_edge("X1", "X2");
    g.add_edge("X2", "X3");
    g.add_edge("X4", "X3");
    return g;
}

inline LinearSem four_node_sem() {
    return LinearSem(four_node_dag(),
                     {{"X4", "X1", 2.0}, {"X1", "X2", 3.0}, {"X2", "X3", 2.0}, {"X4", "X3", 1.0}},
                     {{"X1", 1.0}, {"X2", 1.0}, {"X3", 1.0}, {"X4", 1.0}});
}

inline Pdag four_node_cpdag() {
    Pdag c({"X1", "X2", "X3", "X4"});
    c.add_directed_edge("X2", "X3");
    c.add_directed_edge("X4", "X3");
    c.add_undirected_edge("X4", "X1");
    c.add_undirected_edge("X1", "X2");
    return c;
}

// motivation / participation / social skills / rearrest chain-and-fork graph
inline Dag mediation_dag() {
    Dag g({"M", "P", "R", "S"});
    g.add_edge("M", "P");
    g.add_edge("M", "R");
    g.add_edge("P", "S");
    g.add_edge("S", "R");
    return g;
}

}  // namespace causalkit::fixtures
