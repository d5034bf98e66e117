"""SI scale factors. Multiply to convert into SI, divide to convert out."""

M = 1.0
CM = 1e-2
MM = 1e-3
UM = 1e-6
NM = 1e-9

HZ = 1.0
KHZ = 1e3
MHZ = 1e6
GHZ = 1e9

W = 1.0
MW = 1e-3
