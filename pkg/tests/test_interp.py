import numpy as np

from hpbl.interp import element_placement, elementwise_interp, sup_errors
from hpbl.oracles import boundary_layer_fn, corner_singularity_fn
from hpbl.patches import PatchKind, PatchParams, build_pattern


class _Poly:
    """Bilinear polynomial with exact gradient, reproducible at any q >= 1."""

    def value(self, x, y):
        return 2.0 + x - 3.0 * y + 0.5 * x * y

    def grad(self, x, y):
        return np.stack([1.0 + 0.5 * y, -3.0 + 0.5 * x + 0.0 * y], axis=-1)


def test_placements_roundtrip():
    patch = build_pattern(PatchKind.MIXED, PatchParams(sigma=0.5, L=2, n=2))
    rng = np.random.default_rng(0)
    for e in patch.elements:
        place = element_placement(patch, e)
        ref = rng.uniform(0.05, 0.95, size=(20, 2))
        if e.shape == "t":
            ref[:, 1] *= ref[:, 0]
        back = place.to_reference(place.to_pattern(ref))
        np.testing.assert_allclose(back, ref, atol=1e-13)


def test_interpolant_continuity_across_facets():
    # sample a shared vertical facet from both sides
    patch = build_pattern(PatchKind.BOUNDARY_LAYER, PatchParams(sigma=0.25, L=3, n=3))
    f = boundary_layer_fn(1.0, 0.05)
    itp = elementwise_interp(f, patch, 4)
    t = np.linspace(0.0, 1.0, 13)
    # evaluate along interior horizontal meshlines from the elements above
    # and below: the traces must agree because edge nodes are shared
    lines = sorted({patch.nodes[e.nodes, 1].max() for e in patch.elements})[:-1]
    for y0 in lines:
        below = above = None
        for idx, e in enumerate(patch.elements):
            ys = patch.nodes[list(e.nodes), 1]
            if ys.max() == y0:
                below = idx
            if ys.min() == y0:
                above = idx
        pts = np.column_stack([t, np.full_like(t, y0)])
        vb = _eval_at(itp, below, pts)
        va = _eval_at(itp, above, pts)
        np.testing.assert_allclose(vb, va, atol=1e-13)


def _eval_at(itp, idx, pattern_pts):
    ref = itp.placements[idx].to_reference(pattern_pts)
    vals, _, _ = itp.eval_on_element(idx, ref)
    return vals


def test_interpolation_reproduces_polynomials():
    patch = build_pattern(PatchKind.TENSOR, PatchParams(sigma=0.5, L=1, n=2))
    f = _Poly()
    itp = elementwise_interp(f, patch, 3)
    ev, eg = sup_errors(itp, f, n=40, grad_weight=1.0)
    assert ev < 1e-13
    assert eg < 1e-12


def test_boundary_layer_error_decays_in_q():
    eps = 1e-2
    patch = build_pattern(PatchKind.BOUNDARY_LAYER, PatchParams(sigma=0.25, L=4, n=4))
    f = boundary_layer_fn(1.0, eps)
    errs = []
    for q in (2, 4, 6, 8):
        itp = elementwise_interp(f, patch, q)
        ev, eg = sup_errors(itp, f, n=80, grad_weight=eps)
        errs.append(ev + eg)
    assert errs[-1] < 1e-3 * errs[0]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_corner_singularity_error_decays_in_n():
    f = corner_singularity_fn(0.5)
    errs = []
    for n in (2, 4, 6):
        patch = build_pattern(PatchKind.CORNER, PatchParams(sigma=0.25, L=0, n=n))
        itp = elementwise_interp(f, patch, 6)
        ev, _ = sup_errors(itp, f, n=60, grad_weight=None)
        errs.append(ev)
    # one refinement ring gains roughly sigma^(1-beta) = 0.5 per step
    assert errs[1] < 0.5 * errs[0]
    assert errs[2] < 0.5 * errs[1]
