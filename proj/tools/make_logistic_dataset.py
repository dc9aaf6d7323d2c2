"""Regenerates data/logistic_200.csv: 200 rows, four features, Bernoulli labels."""
import numpy as np

rng = np.random.default_rng(7)
n = 200
x = rng.normal(size=(n, 4)) * np.array([1.0, 2.0, 0.5, 1.5]) + np.array([0.0, 1.0, -0.5, 2.0])
w = np.array([1.2, -0.8, 1.5, 0.4])
z = (x - x.mean(axis=0)) / x.std(axis=0) @ w + 0.3
y = (rng.uniform(size=n) < 1 / (1 + np.exp(-z))).astype(int)

with open("data/logistic_200.csv", "w") as f:
    f.write("f1,f2,f3,f4,label\n")
    for row, label in zip(x, y):
        f.write(",".join(f"{v:.6f}" for v in row) + f",{label}\n")
