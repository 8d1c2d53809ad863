"""Convolution of factors over cyclic groups and its Fourier dual."""
import numpy as np

from convfactor import Factor, Variable, character, convolve, dft, evaluate, marginalize, multiply

x = Variable(0, "x", 2)
f = Factor([x], [1, 2])
g = Factor([x], [3, 4])

# shared variable: cyclic convolution mod 2
print("f * g      ", convolve(f, g).values.real)  # [11, 10]
print("f . g      ", multiply(f, g).values.real)  # [3, 8]

# the DFT turns one into the other
print("dft(f * g) ", dft(convolve(f, g)).values.real)
print("dft f.dft g", multiply(dft(f), dft(g)).values.real)

# no shared variable: convolution is just the outer product
y = Variable(1, "y", 3)
h = Factor([y], [1, 0, 2])
print(np.array_equal(convolve(f, h).values, multiply(f, h).values))

# slicing at a point is a projection in the frequency domain
z = Variable(2, "z", 4)
rng = np.random.default_rng(0)
k = Factor([y, z], rng.random((3, 4)))
slice_direct = evaluate(k, {y.id: 2})
slice_dual = dft(marginalize(multiply(dft(k), character(y, 2)), {y.id}), "inverse")
print("slice error", np.max(np.abs(slice_direct.values - slice_dual.values)))
