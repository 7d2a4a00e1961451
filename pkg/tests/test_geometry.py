import numpy as np
import pytest

from dmimo_ee import geometry as g


# ---------------------------------------------------------------------------
# toroidal distance


def test_wrap_distance_crosses_the_seam():
    assert g.wrap_distance(np.array([0.0, 0.0]), np.array([990.0, 0.0]), 1000.0) == pytest.approx(10.0)


def test_wrap_distance_corner_pair():
    d = g.wrap_distance(np.array([10.0, 10.0]), np.array([990.0, 990.0]), 1000.0)
    assert d == pytest.approx(20.0 * np.sqrt(2.0))


def test_wrap_distance_matches_nine_image_minimum():
    rng = np.random.default_rng(3)
    side = 1000.0
    for _ in range(200):
        p = rng.uniform(-side / 2, side / 2, 2)
        q = rng.uniform(-side / 2, side / 2, 2)
        images = [
            np.hypot(p[0] - (q[0] + i * side), p[1] - (q[1] + j * side))
            for i in (-1, 0, 1)
            for j in (-1, 0, 1)
        ]
        assert g.wrap_distance(p, q, side) == pytest.approx(min(images), rel=1e-12)


def test_wrap_distance_never_exceeds_half_diagonal():
    rng = np.random.default_rng(4)
    side = 777.0
    pts = rng.uniform(-side / 2, side / 2, (100, 2))
    for p in pts[:50]:
        for q in pts[50:]:
            assert g.wrap_distance(p, q, side) <= side * np.sqrt(2.0) / 2.0 + 1e-9


def test_wrap_distance_matrix_agrees_with_scalar():
    rng = np.random.default_rng(5)
    ap = rng.uniform(-250, 250, (4, 2))
    ue = rng.uniform(-250, 250, (3, 2))
    mat = g.wrap_distance_matrix(ap, ue, 500.0)
    assert mat.shape == (4, 3)
    for m in range(4):
        for t in range(3):
            assert mat[m, t] == pytest.approx(g.wrap_distance(ap[m], ue[t], 500.0))


# ---------------------------------------------------------------------------
# three-slope path loss


def test_pathloss_far_slope_hand_value():
    # at 100 m the far branch applies: -140.7 - 35*log10(0.1) = -105.7 dB
    got = g.three_slope_pathloss_db(np.array([100.0]), 10.0, 50.0, 140.7)[0]
    assert got == pytest.approx(-140.7 - 35.0 * np.log10(0.1), abs=1e-12)
    assert got == pytest.approx(-105.7, abs=1e-9)


def test_pathloss_middle_slope_hand_value():
    # 20 m sits between the breakpoints: -140.7 - 15*log10(0.05) - 20*log10(0.02)
    expect = -140.7 - 15.0 * np.log10(0.05) - 20.0 * np.log10(0.02)
    got = g.three_slope_pathloss_db(np.array([20.0]), 10.0, 50.0, 140.7)[0]
    assert got == pytest.approx(expect, abs=1e-12)


def test_pathloss_constant_below_first_breakpoint():
    d = np.array([0.5, 3.0, 9.99, 10.0])
    vals = g.three_slope_pathloss_db(d, 10.0, 50.0, 140.7)
    assert np.ptp(vals) == pytest.approx(0.0, abs=1e-12)


def test_pathloss_continuous_at_both_breakpoints():
    eps = 1e-9
    for bp in (10.0, 50.0):
        lo, hi = g.three_slope_pathloss_db(np.array([bp - eps, bp + eps]), 10.0, 50.0, 140.7)
        assert lo == pytest.approx(hi, abs=1e-6)


def test_pathloss_slopes_in_decades():
    vals = g.three_slope_pathloss_db(np.array([1000.0, 2000.0, 20.0, 40.0]), 10.0, 50.0, 140.7)
    assert vals[0] - vals[1] == pytest.approx(35.0 * np.log10(2.0), rel=1e-12)
    assert vals[2] - vals[3] == pytest.approx(20.0 * np.log10(2.0), rel=1e-12)


def test_pathloss_monotone_nonincreasing_in_distance():
    d = np.linspace(1.0, 2000.0, 4000)
    vals = g.three_slope_pathloss_db(d, 10.0, 50.0, 140.7)
    assert np.all(np.diff(vals) <= 1e-12)


# ---------------------------------------------------------------------------
# layout and LSFC generation


def test_place_network_bounds_and_shapes():
    cfg = g.GeometryConfig(num_aps=12, num_ues=7, rng_seed=42)
    dep = g.place_network(cfg)
    assert dep.ap_xy.shape == (12, 2)
    assert dep.ue_xy.shape == (7, 2)
    half = cfg.side_m / 2
    for xy in (dep.ap_xy, dep.ue_xy):
        assert np.all(xy >= -half) and np.all(xy <= half)


def test_place_network_deterministic_and_seed_sensitive():
    cfg = g.GeometryConfig(rng_seed=11)
    a = g.place_network(cfg)
    b = g.place_network(cfg)
    c = g.place_network(g.GeometryConfig(rng_seed=12))
    assert np.array_equal(a.ap_xy, b.ap_xy) and np.array_equal(a.ue_xy, b.ue_xy)
    assert not np.array_equal(a.ap_xy, c.ap_xy)


def test_lsfc_matches_pathloss_when_shadowing_disabled():
    cfg = g.GeometryConfig(num_aps=5, num_ues=4, shadow_std_db=0.0, rng_seed=2)
    dep = g.place_network(cfg)
    beta = g.compute_lsfc(dep, cfg)
    dist = g.wrap_distance_matrix(dep.ap_xy, dep.ue_xy, cfg.side_m)
    pl = g.three_slope_pathloss_db(dist, cfg.pathloss_d0_m, cfg.pathloss_d1_m, cfg.pathloss_fixed_db)
    assert np.allclose(beta, 10.0 ** (pl / 10.0), rtol=1e-12)


def test_lsfc_shadowing_only_beyond_second_breakpoint():
    cfg = g.GeometryConfig(num_aps=40, num_ues=20, shadow_std_db=8.0, rng_seed=9)
    dep = g.place_network(cfg)
    beta = g.compute_lsfc(dep, cfg)
    dist = g.wrap_distance_matrix(dep.ap_xy, dep.ue_xy, cfg.side_m)
    pl_lin = 10.0 ** (
        g.three_slope_pathloss_db(dist, cfg.pathloss_d0_m, cfg.pathloss_d1_m, cfg.pathloss_fixed_db)
        / 10.0
    )
    near = dist <= cfg.pathloss_d1_m
    if np.any(near):
        assert np.allclose(beta[near], pl_lin[near], rtol=1e-12)
    far = ~near
    # almost surely no far-link draw lands exactly on zero shadowing
    assert np.mean(np.isclose(beta[far], pl_lin[far], rtol=1e-12, atol=0.0)) < 0.01


def test_lsfc_deterministic_given_seed():
    cfg = g.GeometryConfig(num_aps=6, num_ues=5, rng_seed=31)
    dep = g.place_network(cfg)
    assert np.array_equal(g.compute_lsfc(dep, cfg), g.compute_lsfc(dep, cfg))


def test_geometry_config_rejects_bad_values():
    with pytest.raises(ValueError):
        g.GeometryConfig(side_m=0.0)
    with pytest.raises(ValueError):
        g.GeometryConfig(pilot_len=300, coherence_len=200)
    with pytest.raises(ValueError):
        g.GeometryConfig(pathloss_d0_m=60.0, pathloss_d1_m=50.0)
    with pytest.raises(ValueError):
        g.GeometryConfig(shadow_std_db=-1.0)


# ---------------------------------------------------------------------------
# pilots


def test_round_robin_pilots_cycle_in_order():
    pa = g.assign_pilots(7, 3, scheme="round_robin")
    assert np.array_equal(pa.pilot_of, np.array([0, 1, 2, 0, 1, 2, 0]))


def test_pilots_distinct_when_ues_fit():
    for scheme in ("round_robin", "random"):
        pa = g.assign_pilots(5, 5, scheme=scheme, seed=1)
        assert len(set(pa.pilot_of.tolist())) == 5


def test_random_pilots_balanced_and_seeded():
    pa1 = g.assign_pilots(11, 4, scheme="random", seed=8)
    pa2 = g.assign_pilots(11, 4, scheme="random", seed=8)
    pa3 = g.assign_pilots(11, 4, scheme="random", seed=9)
    assert np.array_equal(pa1.pilot_of, pa2.pilot_of)
    assert not np.array_equal(pa1.pilot_of, pa3.pilot_of)
    counts = np.bincount(pa1.pilot_of, minlength=4)
    assert counts.max() - counts.min() <= 1


def test_sharer_mask_matches_sharers():
    pa = g.assign_pilots(6, 2, scheme="round_robin")
    mask = pa.sharer_mask()
    for t in range(6):
        assert np.array_equal(np.flatnonzero(mask[t]), pa.sharers(t))
        assert mask[t, t]  # a UE shares its own pilot slot


def test_unknown_pilot_scheme_rejected():
    with pytest.raises(ValueError):
        g.assign_pilots(4, 2, scheme="fancy")


# ---------------------------------------------------------------------------
# initial association schemes


def _beta(seed, m=8, t=5):
    rng = np.random.default_rng(seed)
    return 10.0 ** rng.uniform(-12.0, -8.0, (m, t))


def test_scheme_all_connects_everything():
    beta = _beta(0)
    assert np.array_equal(g.initial_association(beta, "all"), np.ones_like(beta))


def test_scheme_top_aps_per_ue_picks_strongest_rows():
    beta = _beta(1)
    d = g.initial_association(beta, "top10_aps_per_ue", top_k=3)
    for t in range(beta.shape[1]):
        chosen = np.flatnonzero(d[:, t])
        assert chosen.size == 3
        assert set(chosen) == set(np.argsort(-beta[:, t])[:3])


def test_scheme_top_ues_per_ap_picks_strongest_columns():
    beta = _beta(2)
    d = g.initial_association(beta, "top10_ues_per_ap", top_k=2)
    for m in range(beta.shape[0]):
        chosen = np.flatnonzero(d[m])
        assert set(chosen) >= set(np.argsort(-beta[m])[:2])


def test_scheme_lsfc_fraction_threshold():
    beta = _beta(3)
    d = g.initial_association(beta, "lsfc95", lsfc_fraction=0.95)
    expect = beta >= 0.95 * beta.max(axis=0, keepdims=True)
    assert np.array_equal(d, expect.astype(float))
    assert np.all(d.sum(axis=0) >= 1)  # the column max always qualifies


def test_scheme_random_repairs_orphans_and_is_seeded():
    beta = _beta(4, m=3, t=40)
    d1 = g.initial_association(beta, "random", seed=5)
    d2 = g.initial_association(beta, "random", seed=5)
    assert np.array_equal(d1, d2)
    assert np.all(d1.sum(axis=0) >= 1)
    assert set(np.unique(d1)) <= {0.0, 1.0}


def test_every_scheme_covers_every_ue():
    beta = _beta(6, m=4, t=30)
    for scheme in g.ASSOCIATION_SCHEMES:
        d = g.initial_association(beta, scheme, seed=7)
        assert np.all(d.sum(axis=0) >= 1), scheme


def test_unknown_association_scheme_rejected():
    with pytest.raises(ValueError):
        g.initial_association(_beta(0), "nope")


# ---------------------------------------------------------------------------
# CSV round trips


def test_matrix_csv_round_trip_exact(tmp_path):
    rng = np.random.default_rng(12)
    mat = 10.0 ** rng.uniform(-13.0, -7.0, (6, 4))
    path = tmp_path / "beta.csv"
    g.save_matrix_csv(path, mat)
    again = g.load_matrix_csv(path)
    assert np.array_equal(mat, again)


def test_deployment_csv_written(tmp_path):
    cfg = g.GeometryConfig(num_aps=3, num_ues=2, rng_seed=0)
    dep = g.place_network(cfg)
    ap_path, ue_path = tmp_path / "ap.csv", tmp_path / "ue.csv"
    g.save_deployment_csv(dep, ap_path, ue_path)
    assert np.array_equal(np.loadtxt(ap_path, delimiter=","), dep.ap_xy)
    assert np.array_equal(np.loadtxt(ue_path, delimiter=","), dep.ue_xy)
