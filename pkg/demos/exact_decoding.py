"""
Decoding from an exact diagnosis
================================

For a small code the conditional mean of the diagnosis label can be computed
by enumerating the stabilizer group. Decoding that mean recovers the most
likely logical class, which is the best any decoder can do.
"""

import numpy as np

from topodecode.codes import build_code, syndrome
from topodecode.decode import ExactL2Predictor, decode_one, exact_optimal_class, logical_error_rate
from topodecode.diagnosis import build_scheme
from topodecode.noise import NoiseModel, sample_errors

code = build_code("surface_rotated", 3)
model = NoiseModel("depolarizing", 0.15)
scheme = build_scheme(code, "uniform")
oracle = ExactL2Predictor(code, scheme, model)

e = sample_errors(model, code.n, seed=5, start=0, count=5)
for s in syndrome(code, e):
    out = decode_one(code, scheme, oracle, s)
    print("syndrome", "".join(map(str, s)), "class weights", np.round(out.q, 3),
          "chosen", out.chosen_class, "optimal", exact_optimal_class(code, model, s))

# Monte-Carlo logical error rate with a Wilson 95% interval
print(logical_error_rate(code, scheme, oracle, model, trials=20_000, seed=99))
