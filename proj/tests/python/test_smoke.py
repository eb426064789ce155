"""End-to-end smoke tests for the compiled module.

These stay deliberately cheap: tiny meshes, tiny budgets. The heavy
numerical contracts live in the C++ unit suites; here we only check that
the bindings expose working objects and that values survive the crossing.
"""

import math

import numpy as np
import pytest

import cardioinfer as ci


def small_mesh():
    return ci.generate_ellipsoid_shell(8, 8, [20.0, 20.0, 40.0], 6.0, 2, 7)


def test_package_surface():
    assert ci.__version__
    for name in ci.__all__:
        assert getattr(ci, name) is not None


def test_shell_counts_and_roundtrip():
    mesh = small_mesh()
    assert mesh.n_vertices == 128
    assert mesh.n_edges > 0
    endo = mesh.endocardial_vertices()
    assert len(endo) == 64

    back = ci.load_mesh(ci.serialize_mesh(mesh))
    assert back.n_vertices == mesh.n_vertices
    assert back.n_edges == mesh.n_edges
    for v in (0, 63, 127):
        assert np.allclose(back.vertex(v), mesh.vertex(v))
    with pytest.raises(IndexError):
        mesh.vertex(128)


def test_embedding_shape_and_inversion():
    mesh = small_mesh()
    emb = ci.ManifoldEmbedding.build(mesh, 8)
    latent = np.asarray(emb.latent)
    ids = list(emb.vertex_ids)
    assert latent.shape == (64, 2)
    assert len(emb) == 64
    assert sorted(ids) == sorted(mesh.endocardial_vertices())
    hits = sum(emb.nearest_node(latent[i]) == ids[i] for i in range(len(ids)))
    assert hits == len(ids)


def test_simulate_lead_identities():
    mesh = small_mesh()
    emb = ci.ManifoldEmbedding.build(mesh, 8)
    space = ci.parameter_space(emb, n_stimuli=2)
    assert space.dim == 9

    lead = ci.LeadConfig.default_torso()
    lead.duration_ms = 400.0
    lead.dt_ms = 2.0
    theta = ci.ordered_transform(np.full(space.dim, 0.5), space)
    trace = ci.simulate(theta, mesh, emb, space, lead)

    leads = np.asarray(trace.leads)
    assert leads.shape == (12, 200)
    assert np.abs(leads[0] + leads[2] - leads[1]).max() < 1e-12
    assert np.abs(leads[3] + leads[4] + leads[5]).max() < 1e-12
    assert ci.ecg_mse(trace, trace) == 0.0

    again = ci.simulate(theta, mesh, emb, space, lead)
    assert ci.ecg_mse(trace, again) == 0.0


def test_ordered_transform_respects_constraints():
    mesh = small_mesh()
    emb = ci.ManifoldEmbedding.build(mesh, 8)
    space = ci.parameter_space(emb, n_stimuli=1)
    rng = np.random.default_rng(3)
    for _ in range(20):
        theta = ci.ordered_transform(rng.uniform(size=space.dim), space)
        assert theta[2] >= theta[3] >= theta[4] > 0
        assert min(theta[0], theta[1]) >= theta[2]


def test_latin_hypercube_stratifies():
    bounds = np.array([[0.0, 1.0], [-2.0, 2.0], [10.0, 20.0]])
    pts = np.asarray(ci.latin_hypercube(12, bounds, seed=5))
    assert pts.shape == (12, 3)
    for d in range(3):
        lo, hi = bounds[d]
        cells = np.floor((pts[:, d] - lo) / (hi - lo) * 12).astype(int)
        assert sorted(cells.tolist()) == list(range(12))


def test_bo_minimize_quadratic():
    def f(x):
        return (x[0] - 0.3) ** 2 + (x[1] - 0.7) ** 2

    bounds = np.array([[0.0, 1.0], [0.0, 1.0]])
    out = ci.bo_minimize(f, bounds, budget=25, n_init=8, seed=11)
    assert len(out["objective"]) == 25
    best = np.minimum.accumulate(out["objective"])
    assert np.array_equal(best, out["best_so_far"])
    assert out["best_value"] < 1e-3
    assert np.allclose(out["best_x"], [0.3, 0.7], atol=0.05)

    with pytest.raises(ValueError):
        ci.bo_minimize(f, bounds, budget=25, n_init=8, acquisition="ucb")


def test_kl_values():
    z = np.zeros(3)
    o = np.ones(3)
    assert ci.kl_diag_gaussians(z, o, z, o) == pytest.approx(0.0, abs=1e-15)
    # KL(N(1,1) || N(0,1)) = 1/2 per dimension
    assert ci.kl_diag_gaussians(o, o, z, o) == pytest.approx(1.5, rel=1e-12)
    assert ci.kl_diag_gaussians(z, 2 * o, z, o) == pytest.approx(
        3 * (0.5 * 4 - 0.5 - math.log(2.0)), rel=1e-12
    )


def test_run_recovery_dict():
    config = """
    {
      "seed": 7,
      "mesh": {"synthetic": {"n_theta": 8, "n_phi": 8,
               "inner_radii": [10, 10, 15], "wall_thickness": 4,
               "n_layers": 2, "seed": 3}},
      "space": {"n_stimuli": 1},
      "ecg": {"duration_ms": 400, "dt_ms": 2},
      "isomap_k": 8,
      "n_mc": 1,
      "stage1": {"budget": 10, "n_init": 5},
      "stage2": {"budget": 6, "n_init": 3}
    }
    """
    out = ci.run_recovery(config)
    assert math.isfinite(out["final_mse"])
    assert out["prior_mean_mse"] > 0
    assert out["final_mse"] <= out["prior_mean_mse"]
    assert len(out["theta_fit"]) == 7
    assert np.all(np.asarray(out["posterior_sigma"]) > 0)
