import numpy as np
import pytest

from obeforce.angular import HalfInt, half_int_range
from obeforce.state_layout import (
    AtomicTransition,
    build_layout,
    pack,
    unpack,
    maximally_mixed,
)


def transition(jg, je, **kw):
    return AtomicTransition(HalfInt(jg), HalfInt(je), **kw)


def random_density_matrix(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def test_transition_validation():
    with pytest.raises(ValueError):
        transition(0, 2)
    with pytest.raises(ValueError):
        transition(0, 0)  # needs the explicit override
    with pytest.raises(ValueError):
        transition(1, 1, gamma=-1.0)
    tr = transition(0, 0, two_level_override=True)
    assert tr.cg(HalfInt(0), 0) == 1.0


@pytest.mark.parametrize("jg,je,dim_x", [
    ("1/2", "3/2", 35),
    ("1", "1", 35),
    ("2", "1", 63),
    ("1/2", "1/2", 15),
    ("0", "1", 15),
    ("1", "0", 15),
    ("4", "5", 399),
])
def test_dimensions(jg, je, dim_x):
    lay = build_layout(transition(jg, je))
    tr = lay.transition
    n_o = (tr.j_g.twice + 1) * (tr.j_e.twice + 1)
    assert lay.dim_o == 2 * n_o
    assert lay.dim_x == dim_x
    assert lay.dim_x == lay.n_j ** 2 - 1
    assert lay.dim_o + lay.dim_xi == lay.dim_x


def test_two_level_layout_is_three_dimensional():
    lay = build_layout(transition(0, 0, two_level_override=True))
    assert lay.dim_x == 3
    assert lay.dim_o == 2
    assert lay.pop_ms["g"] == ()   # the single ground population is eliminated
    assert len(lay.pop_ms["e"]) == 1


def test_optical_block_ranges():
    # coherence (dm, m) pairs rho_{g m, e m+dm} must exhaust |m|<=Jg, |m+dm|<=Je
    for jg, je in [("1/2", "3/2"), ("2", "1"), ("1", "1")]:
        lay = build_layout(transition(jg, je))
        tr = lay.transition
        expected = {
            (dm, m.twice)
            for dm in range(-(tr.j_g.twice + tr.j_e.twice) // 2,
                            (tr.j_g.twice + tr.j_e.twice) // 2 + 1)
            for m in half_int_range(-tr.j_g, tr.j_g)
            if abs(m + dm) <= tr.j_e
        }
        got = {(dm, m.twice) for dm, m in lay.optical_pairs()}
        assert got == expected


def test_index_maps_are_disjoint_and_complete():
    lay = build_layout(transition("3/2", "3/2"))
    seen = set()
    for dm, m in lay.optical_pairs():
        i = lay.o_u(dm, m)
        seen.update((i, i + 1))
    for level in ("e", "g"):
        for m in lay.pop_ms[level]:
            seen.add(lay.pop_x(level, m))
        for dm, m in lay.zeeman_pairs(level):
            i = lay.z_u_x(level, dm, m)
            seen.update((i, i + 1))
    assert seen == set(range(lay.dim_x))


def test_pack_unpack_round_trip():
    rng = np.random.default_rng(5)
    for jg, je in [("1/2", "3/2"), ("1", "1"), ("2", "1"), ("0", "1")]:
        lay = build_layout(transition(jg, je))
        rho = random_density_matrix(lay.n_j, rng)
        x = pack(rho, lay)
        assert np.max(np.abs(unpack(x, lay) - rho)) < 1e-12


def test_pack_rejects_bad_input():
    lay = build_layout(transition("1/2", "1/2"))
    rho = np.eye(lay.n_j, dtype=complex) / lay.n_j
    rho[0, 1] = 0.2  # breaks hermiticity
    with pytest.raises(ValueError):
        pack(rho, lay)
    with pytest.raises(ValueError):
        pack(2.0 * np.eye(lay.n_j) / lay.n_j, lay)


def test_maximally_mixed_round_trip():
    lay = build_layout(transition(1, 2))
    rho = unpack(maximally_mixed(lay), lay)
    assert np.max(np.abs(rho - np.eye(lay.n_j) / lay.n_j)) < 1e-15
