import numpy as np
import pytest

import equiplan as eq


def test_groups_and_reps():
    d4 = eq.group("D4")
    assert d4.order == 8
    assert eq.icosahedral().order == 60
    table = d4.cayley()
    assert table.shape == (8, 8)
    assert all(d4.compose(g, d4.inverse(g)) == 0 for g in range(8))
    rot = eq.rep_standard(eq.cyclic(4))
    np.testing.assert_allclose(rot.matrix(1), [[0, 1], [-1, 0]], atol=1e-15)
    np.testing.assert_allclose(rot.act(1, np.array([1.0, 0.0])), [0, -1], atol=1e-15)
    reg = eq.rep_regular(eq.cyclic(5))
    assert [round(np.trace(reg.matrix(g))) for g in range(5)] == [5, 0, 0, 0, 0]


def test_bad_inputs_raise():
    with pytest.raises(eq.EquiplanError):
        eq.cyclic(0)
    with pytest.raises(eq.EquiplanError):
        eq.rep_standard(eq.cyclic(4)).act(0, np.zeros(3))
    with pytest.raises(eq.EquiplanError):
        eq.run_experiment("toy", {"trails": 1})


def test_network_is_equivariant():
    g = eq.dihedral(4)
    rin = eq.rep_direct_sum([eq.rep_standard(g), eq.rep_sign(g)])
    net = eq.EquivariantMLP([rin, eq.rep_regular(g), eq.rep_standard(g)], seed=3)
    x = np.random.default_rng(0).normal(size=3)
    for e in range(g.order):
        np.testing.assert_allclose(net(rin.act(e, x)), eq.rep_standard(g).matrix(e) @ net(x), atol=1e-12)
    batch = net.forward_batch(np.stack([x, 2 * x], axis=1))
    np.testing.assert_allclose(batch[:, 0], net(x))


def test_planner_equivariance_with_augmentation():
    env = eq.make_env({"group": "D4"})
    planner = eq.Planner({"n_samples": 4, "n_elites": 1, "n_iters": 2, "horizon": 4})
    states = [env.sample_start(i) for i in range(3)]
    mean, worst = planner.equivariance_error(env, states)
    assert worst < 1e-7
    result = planner.plan(env, states[0])
    assert result.action.shape == (2,)
    assert result.mean.shape == (2, 4)


def test_episode_and_value_iteration():
    env = eq.make_env()
    planner = eq.Planner({"n_samples": 16})
    episode = eq.run_episode(env, planner, env.sample_start(0))
    assert episode["success"]
    assert len(episode["rewards"]) == episode["steps"]

    mdp = eq.GridMDP(9, [(4, 4)], 0.9)
    values, iterations = mdp.value_iterate()
    assert iterations > 0
    np.testing.assert_allclose(values, mdp.shortest_path_values(), atol=1e-8)
    v = np.random.default_rng(1).normal(size=(9, 9))
    np.testing.assert_allclose(eq.rotate_field(mdp.bellman(v), 1), mdp.bellman(eq.rotate_field(v, 1)), atol=1e-12)


def test_domination_and_experiments():
    violations, rows = eq.domination_check(eq.rep_standard(eq.group("C8")), trials=5, m=4)
    assert violations == 0 and len(rows) == 5
    assert all(sym <= raw + 1e-12 for raw, sym in rows)
    g = eq.dihedral(4)
    violations, _ = eq.policy_domination_check(eq.rep_standard(g), eq.rep_standard(g), instances=3)
    assert violations == 0

    assert "coordreg" in eq.experiments()
    assert eq.default_config("toy")["trials"] == 100
    tables, summary, code = eq.run("value-iter", {"random_fields": 2})
    assert code == 0
    checks = {row["check"]: row for row in tables["value_iter_checks.csv"]}
    assert checks["commutation"]["pass"] == "1"
