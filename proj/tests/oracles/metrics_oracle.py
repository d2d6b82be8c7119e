"""Fig. 6 confusion-matrix quantities computed with numpy."""
import numpy as np

M = np.array([
    [97636, 1250, 831, 832, 2135],
    [1669, 24074, 225, 343, 699],
    [1700, 289, 28284, 426, 374],
    [1148, 397, 356, 12296, 344],
    [3032, 637, 270, 284, 37301],
], dtype=np.int64)

total = M.sum()
print("total", total, "trace", np.trace(M))
print("micro_f1 %.10f" % (np.trace(M) / total))
prec = np.diag(M) / M.sum(axis=0)
rec = np.diag(M) / M.sum(axis=1)
f1 = 2 * prec * rec / (prec + rec)
for name, p, r, f in zip(["CT", "Fi", "Pa", "PC", "Tu"], prec, rec, f1):
    print("%s P %.10f R %.10f F1 %.10f" % (name, p, r, f))
print("macro_f1 %.10f" % f1.mean())
np.set_printoptions(precision=6, suppress=True)
print(M / M.sum(axis=1, keepdims=True) * 100)
