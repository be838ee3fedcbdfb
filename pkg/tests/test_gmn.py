import json
import pathlib
from dataclasses import replace

import numpy as np
import pytest

from xychain import Arrangement, ModelParams, build_rdm
from xychain.gmn import (
    Bipartition,
    bipartitions,
    genuine_negativity,
    partial_transpose,
    verify_witness,
)

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def ghz3():
    v = np.zeros(8)
    v[0] = v[7] = 1 / np.sqrt(2)
    return np.outer(v, v)


def random_separable(rng, n_parties=3):
    rho = np.zeros((2 ** n_parties, 2 ** n_parties))
    for _ in range(6):
        vec = np.array([1.0])
        for _ in range(n_parties):
            a = rng.standard_normal(2)
            a /= np.linalg.norm(a)
            vec = np.kron(vec, a)
        rho += rng.uniform(0.05, 1.0) * np.outer(vec, vec)
    return rho / rho.trace()


def test_bipartition_canonicalization():
    assert Bipartition((1,), 3).subset == (0, 2)
    assert Bipartition((2, 1), 3).subset == (0,)
    assert len(bipartitions(3)) == 3
    assert len(bipartitions(4)) == 7
    with pytest.raises(ValueError):
        Bipartition((), 3)
    with pytest.raises(ValueError):
        Bipartition((0, 1, 2), 3)


def test_partial_transpose_involution(rng):
    m = rng.standard_normal((8, 8))
    m = m + m.T
    part = Bipartition((1,), 3)
    assert np.array_equal(partial_transpose(np.eye(8), part, 3), np.eye(8))
    twice = partial_transpose(partial_transpose(m, part, 3), part, 3)
    assert np.array_equal(twice, m)


def test_partial_transpose_ghz_negativity():
    pt = partial_transpose(ghz3(), Bipartition((0,), 3), 3)
    assert np.linalg.eigvalsh(pt)[0] == pytest.approx(-0.5, abs=1e-12)


def test_ghz_matches_reference_fixture():
    reference = json.loads((FIXTURES / "ghz3_reference.json").read_text())
    res = genuine_negativity(ghz3())
    assert res.value == pytest.approx(reference["value"], abs=1e-6)
    ok, _ = verify_witness(res, ghz3())
    assert ok


def test_product_and_maximally_mixed_vanish(rng):
    v = np.kron(np.kron([1.0, 0.0], [0.6, 0.8]), [0.0, 1.0])
    assert genuine_negativity(np.outer(v, v)).value <= 1e-8
    assert genuine_negativity(np.eye(8) / 8).value <= 1e-8
    assert genuine_negativity(random_separable(rng)).value <= 1e-8


def test_verify_witness_flags_tampering():
    res = genuine_negativity(ghz3())
    bad_p = tuple(p + 0.2 * np.eye(8) for p in res.witness.p_blocks)
    tampered = replace(res, witness=replace(res.witness, p_blocks=bad_p))
    ok, report = verify_witness(tampered, ghz3())
    assert not ok
    assert any(not entry["passed"] for entry in report["bipartitions"])


def test_ghz_witness_cannot_certify_separable_states(rng):
    res = genuine_negativity(ghz3())
    w = res.witness.witness
    for _ in range(25):
        rho = random_separable(rng)
        assert np.sum(w * rho) >= -1e-9


def test_monotone_under_mixing_with_identity():
    rho = build_rdm(ModelParams(1.0, 1.0, None), Arrangement((1, 1))).matrix
    values = []
    for p in (0.0, 0.2, 0.4, 0.7, 1.0):
        mixed = (1 - p) * rho + p * np.eye(8) / 8
        values.append(genuine_negativity(mixed).value)
    assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))
    assert values[-1] <= 1e-9


def test_bipartition_relabeling_invariance():
    rho = build_rdm(ModelParams(1.0, 1.0, None), Arrangement((1, 2))).matrix
    base = genuine_negativity(rho).value
    # swap the first two tensor factors
    perm = [0, 1, 4, 5, 2, 3, 6, 7]
    swapped = rho[np.ix_(perm, perm)]
    assert genuine_negativity(swapped).value == pytest.approx(base, abs=1e-8)


def test_value_range_bound():
    for rho in (ghz3(), build_rdm(ModelParams(1.0, 1.0, None),
                                  Arrangement((1, 1))).matrix):
        val = genuine_negativity(rho).value
        assert 0.0 <= val <= 0.5 + 1e-9


def test_rejects_unphysical_input():
    bad = np.eye(8) / 8
    bad[0, 0] += 0.2
    with pytest.raises(ValueError):
        genuine_negativity(bad)
    with pytest.raises(ValueError):
        genuine_negativity(np.eye(4) / 4)


def test_single_peak_profile_near_transition(negativity_curves):
    vals11 = negativity_curves[(1, 1)]
    peak = int(np.argmax(vals11))
    assert 0 < peak < len(vals11) - 1
    assert all(vals11[i] <= vals11[i + 1] + 1e-9 for i in range(peak))
    assert all(vals11[i] >= vals11[i + 1] - 1e-9
               for i in range(peak, len(vals11) - 1))


def test_three_and_four_site_curves_track_each_other(negativity_curves):
    # tightest-packed three- and four-site marginals peak together and
    # stay comparable in magnitude
    vals3 = np.asarray(negativity_curves[(1, 1)])
    vals4 = np.asarray(negativity_curves[(1, 1, 1)])
    assert int(np.argmax(vals3)) == int(np.argmax(vals4))
    assert vals4.max() == pytest.approx(vals3.max(), rel=0.3)
    strong = vals3 > 1e-2
    assert np.all(vals4[strong] > 0.5 * vals3[strong])


def test_gapped_four_site_arrangements_beat_three_site_gap(negativity_curves):
    # the one-vacancy four-site marginals carry clearly more entanglement
    # than the comparable three-site arrangement around the peak
    v12 = np.asarray(negativity_curves[(1, 2)])
    peak = slice(0, 3)  # the common peak region of the grid
    for spacings in ((1, 1, 2), (1, 2, 1)):
        v4 = np.asarray(negativity_curves[spacings])
        assert np.all(v4[peak] > v12[peak])
        assert v4[peak].max() > 1.5 * v12[peak].max()
