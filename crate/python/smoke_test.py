"""Smoke test for the lifelong_irl_py extension module.

Build the extension first:

    cargo build --release -p lifelong-irl-py --features extension-module

then run `python3 python/smoke_test.py`. The script copies the built shared
library next to itself under the importable name if it is not already
importable.
"""

import importlib
import pathlib
import shutil
import sys
import tempfile

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def load():
    try:
        return importlib.import_module("lifelong_irl_py")
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for name in ("liblifelong_irl_py.so", "liblifelong_irl_py.dylib"):
            built = ROOT / "target" / profile / name
            if built.exists():
                dest = HERE / "lifelong_irl_py.so"
                shutil.copyfile(built, dest)
                sys.path.insert(0, str(HERE))
                return importlib.import_module("lifelong_irl_py")
    sys.exit("extension not built; run: cargo build --release -p lifelong-irl-py --features extension-module")


def main():
    lirl = load()

    task = lirl.objectworld_task(7, grid_size=10, outer_colors=3, inner_colors=2)
    mdp = task.mdp
    assert mdp.feature_dim == 31 * 5, mdp
    print("task:", mdp)

    demos = task.demonstrations(16, 16, seed=1)
    fit = lirl.fit_maxent(mdp, demos, max_iterations=60)
    learned = mdp.state_rewards(fit["alpha"])
    print("maxent: iterations %d, reward difference %.3f" % (fit["iterations"], lirl.reward_difference(learned, task.true_reward)))

    basis = lirl.SharedBasis(mdp.feature_dim, 3, lam=1e-2, mu=1e-2, seed=0)
    for i in range(4):
        t = lirl.objectworld_task(100 + i, grid_size=10, outer_colors=3, inner_colors=2)
        d = t.demonstrations(16, 16, seed=i)
        alpha = lirl.fit_maxent(t.mdp, d, max_iterations=60)["alpha"]
        h = lirl.estimate_hessian(t.mdp, alpha, samples=200, horizon=16, seed=i)
        s, theta = basis.learn(i, alpha, h)
        print("task %d: code %s" % (i, ", ".join("%.3f" % x for x in s)))
    assert basis.tasks_seen == 4
    assert len(basis.matrix()) == mdp.feature_dim

    hw = lirl.highway_task(3, road_length=16)
    assert hw.mdp.feature_dim == 71
    assert abs(hw.value_difference(hw.true_theta)) < 1e-9

    with tempfile.TemporaryDirectory() as out:
        done = lirl.run_experiment(
            "env = objectworld\ngrid-size = 8\nouter-colors = 3\ninner-colors = 2\n"
            "object-density = 0.15\ntasks = 2\ntrials = 1\nk = 1\ndemos = 4\n"
            "hessian-samples = 50\nmax-iterations = 10\n",
            out,
        )
        assert done == 1
        header = (pathlib.Path(out) / "metrics.csv").read_text().splitlines()[0]
        assert header == "trial,checkpoint,task_id,task_order_index,method,reward_diff,value_diff,train_time_s", header

    print("smoke test passed")


if __name__ == "__main__":
    main()
