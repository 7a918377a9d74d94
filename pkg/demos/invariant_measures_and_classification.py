"""Stationary measures, mixtures, and the recurrent/transient splitting.

A form with two conservative blocks and one killed block has exactly two
ergodic stationary measures; every invariant measure is a unique mixture
of them, and the space splits into the conservative part and the part
where mass dies.
"""

import numpy as np

from ergodec import (
    DirichletForm,
    classification_decomposition,
    classify,
    decompose,
    decompose_invariant_measure,
    ergodic_measures,
    invariant_measure_relations,
    validate_space,
)

space = validate_space(
    [("a", 0.25), ("b", 0.25), ("c", 0.25), ("d", 0.25), ("e", 1.0), ("f", 1.0)]
)
jump = np.zeros((6, 6))
jump[0, 1] = jump[1, 0] = 1.0
jump[2, 3] = jump[3, 2] = 2.0
jump[4, 5] = jump[5, 4] = 1.0
killing = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0])
form = DirichletForm.from_jump_kernel(space, jump, killing)

cls = classify(form)
print("conservative part:", cls.conservative_part)
print("transient part:   ", cls.transient_part)

measures = ergodic_measures(form)
for m in measures:
    print("ergodic measure on", m.component, "=", m.weights)

eta = 0.3 * measures[0].weights + 1.7 * measures[1].weights
mixture = decompose_invariant_measure(form, eta)
print("mixture weights:", mixture.weights)
print("reconstruction defect:", mixture.reconstruction_defect)

m0 = decompose_invariant_measure(form, measures[0].weights)
m1 = decompose_invariant_measure(form, measures[1].weights)
rel = invariant_measure_relations(form, m0, m1)
print("distinct ergodic measures mutually singular:", rel.mutually_singular)

out = classification_decomposition(decompose(form))
print("global flags equal conjunction of fiber flags:", out.consistent)
