use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(lifelong_irl_py::lifelong_irl_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("lirl", module).unwrap();
        f(py, &globals);
    });
}

fn run(py: Python<'_>, globals: &Bound<'_, PyDict>, code: &str) {
    let code = std::ffi::CString::new(code).unwrap();
    py.run(&code, Some(globals), None).unwrap_or_else(|e| panic!("python error: {e}"));
}

#[test]
fn fit_and_share_a_basis() {
    with_module(|py, g| {
        run(
            py,
            g,
            r#"
thetas = []
basis = lirl.SharedBasis(71, 2, lam=1e-2, mu=1e-2, seed=3)
for i in range(2):
    task = lirl.highway_task(i, road_length=12)
    demos = task.demonstrations(16, 8, seed=i)
    fit = lirl.fit_maxent(task.mdp, demos, max_iterations=40)
    h = lirl.estimate_hessian(task.mdp, fit["alpha"], samples=100, horizon=8, seed=i)
    assert len(h) == 71 and all(abs(h[a][b] - h[b][a]) < 1e-12 for a in range(71) for b in range(71))
    s, theta = basis.learn(i, fit["alpha"], h)
    assert len(s) == 2 and len(theta) == 71
    thetas.append(theta)
assert basis.tasks_seen == 2
again = basis.reward_for_task(0, reoptimize=True)
assert len(again) == 71
task = lirl.highway_task(0, road_length=12)
assert lirl.reward_difference(task.true_reward, task.true_reward) == 0.0
assert abs(task.value_difference(task.true_theta)) < 1e-9
"#,
        );
    });
}

#[test]
fn errors_become_python_exceptions() {
    with_module(|py, g| {
        run(
            py,
            g,
            r#"
try:
    lirl.reward_difference([1.0, 2.0], [3.0, 3.0])
    raise AssertionError("expected ValueError")
except ValueError as e:
    assert "constant" in str(e)
try:
    lirl.SharedBasis(3, 5)
    raise AssertionError("expected ValueError")
except ValueError:
    pass
"#,
        );
    });
}

#[test]
fn task_json_round_trip() {
    with_module(|py, g| {
        run(
            py,
            g,
            r#"
task = lirl.objectworld_task(4, grid_size=10, outer_colors=3, inner_colors=2)
clone = lirl.Task.from_json(task.to_json())
assert clone.true_reward == task.true_reward
assert task.mdp.feature_dim == 155
"#,
        );
    });
}
