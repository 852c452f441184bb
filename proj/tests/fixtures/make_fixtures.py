"""Regenerates the LightGBM fixtures used by the test suites.

Requires numpy and lightgbm. Output is committed; rerunning is only needed
when the fixtures change.
"""
import json
import pathlib

import lightgbm as lgb
import numpy as np

HERE = pathlib.Path(__file__).resolve().parent


def write_csv(path, names, X, y):
    with open(path, "w") as f:
        f.write(",".join(names + ["label"]) + "\n")
        for row, label in zip(X, y):
            f.write(",".join(f"{v:.4f}" for v in row) + f",{int(label)}\n")


def synth_binary(rng):
    n = 700
    X = rng.normal(0.0, 1.0, size=(n, 6))
    X[:, 4] = rng.uniform(0.0, 10.0, size=n)
    X[:, 5] = rng.exponential(2.0, size=n)
    logit = 1.5 * X[:, 0] - 1.0 * X[:, 1] + 0.8 * X[:, 2] * X[:, 3] + 0.3 * (X[:, 4] - 5.0)
    y = (logit + rng.normal(0.0, 0.5, size=n) > 0).astype(int)
    X = np.round(X, 4)
    names = [f"feat{i}" for i in range(6)]
    params = dict(objective="binary", num_leaves=6, learning_rate=0.2,
                  min_data_in_leaf=10, use_missing=False, verbose=-1, seed=7,
                  deterministic=True, num_threads=1)
    booster = lgb.train(params, lgb.Dataset(X[:500], y[:500], feature_name=names),
                        num_boost_round=20)
    booster.save_model(str(HERE / "synth_lgbm.txt"))
    write_csv(HERE / "synth_train.csv", names, X[:500], y[:500])
    write_csv(HERE / "synth_test.csv", names, X[500:], y[500:])


def synth_multiclass(rng):
    n = 150
    X = np.round(rng.normal(0.0, 1.0, size=(n, 3)), 4)
    y = np.where(X[:, 0] > 0.5, 2, np.where(X[:, 1] > 0.0, 1, 0))
    names = ["a", "b", "c"]
    params = dict(objective="multiclass", num_class=3, num_leaves=4,
                  learning_rate=0.3, min_data_in_leaf=5, use_missing=False,
                  verbose=-1, seed=3, deterministic=True, num_threads=1)
    booster = lgb.train(params, lgb.Dataset(X, y, feature_name=names),
                        num_boost_round=2)
    booster.save_model(str(HERE / "multi_lgbm.txt"))
    write_csv(HERE / "multi_data.csv", names, X, y)
    np.savetxt(HERE / "multi_raw.txt", booster.predict(X, raw_score=True), fmt="%.17g")


def main():
    rng = np.random.default_rng(20240601)
    synth_binary(rng)
    synth_multiclass(rng)
    # raw scores from LightGBM itself, for the parser cross-check
    booster = lgb.Booster(model_file=str(HERE / "synth_lgbm.txt"))
    data = np.loadtxt(HERE / "synth_test.csv", delimiter=",", skiprows=1)[:, :6]
    np.savetxt(HERE / "synth_test_raw.txt", booster.predict(data, raw_score=True), fmt="%.17g")
    # TreeSHAP rankings of the first 100 test rows, as an external explainer
    contrib = booster.predict(data[:100], pred_contrib=True)[:, :6]
    names = booster.feature_name()
    with open(HERE / "synth_shap_rankings.json", "w") as f:
        records = []
        for i, row in enumerate(contrib):
            order = sorted(range(6), key=lambda j: (-abs(row[j]), j))
            records.append(json.dumps({"instance": i, "order": [names[j] for j in order]}))
        f.write("[\n" + ",\n".join(records) + "\n]\n")


if __name__ == "__main__":
    main()
