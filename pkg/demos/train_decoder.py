"""
Training a small neural decoder
===============================

Sample (syndrome, diagnosis) pairs, fit a dense network to the diagnosis
bits with a squared loss, and decode with its outputs. A few epochs on a
small set already approach the minimum-distance decoder at d = 3.
"""

from topodecode import nn
from topodecode.baselines import baseline_error_rate
from topodecode.codes import build_code
from topodecode.dataset import generate_dataset
from topodecode.decode import NetworkPredictor, logical_error_rate
from topodecode.diagnosis import build_scheme
from topodecode.noise import NoiseModel

code = build_code("surface_rotated", 3)
scheme = build_scheme(code, "uniform")
model = NoiseModel("bit_flip", 0.1)

ds = generate_dataset(code, scheme, model, count=20_000, seed=1)
net = nn.build_mlp(code.num_checks, scheme.rows, hidden=(64, 64), seed=0)
net, trace = nn.train(net, ds.s, ds.g, epochs=5, batch_size=256, seed=0)
print("loss per epoch:", [round(x, 4) for x in trace])

pred = NetworkPredictor(net, code)
print("network:", logical_error_rate(code, scheme, pred, model, trials=20_000, seed=99))
print("md:     ", baseline_error_rate(code, model, "md", trials=20_000, seed=99))
