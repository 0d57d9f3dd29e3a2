CONVERGED = 0
OCTAHEDRON = 1
MAX_ITERS = 2
DEAD = 3

STATUS_NAMES = {CONVERGED: "converged", OCTAHEDRON: "entered_octahedron", MAX_ITERS: "max_iters", DEAD: "dead"}

# success probabilities below this are treated as "never succeeds"
DEAD_PROBABILITY = 1e-14
