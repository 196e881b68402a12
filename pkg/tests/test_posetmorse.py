import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tameflows.complex import nerve, simplex, simplex_boundary, suspension, sphere0
from tameflows.conley import Verdict, unstable_link
from tameflows.homology import PolyZ, poincare_polynomial
from tameflows.orientation import orientation_from_function
from tameflows.posetmorse import (
    CWFacePoset, Poset, PosetError, c_plus_minus, check_admissible, cminus_morse_report,
    coherence, face_poset, interval, longest_chain, mplus_complex, poset_morse_polynomial,
    poset_unstable_link, regular_points, violation_pairs, violation_sets,
)


def forman_edge():
    P = Poset.from_covers(["v0", "v1", "e"], [("v0", "e"), ("v1", "e")])
    return CWFacePoset.build(P, {"v0": 0, "v1": 0, "e": 1}), {"v0": 0, "v1": 2, "e": 1}


def dim_function(FP):
    return {x: float(FP.dim[x]) for x in FP.poset.elements}


def perturbed(FP, rng, scale=0.7):
    return {x: FP.dim[x] + rng.normal(0, scale) for x in FP.poset.elements}


def test_poset_construction_and_order():
    P = Poset.from_relation("abcd", [("a", "b"), ("b", "c"), ("a", "c"), ("a", "d")])
    assert P.covers == frozenset({("a", "b"), ("b", "c"), ("a", "d")})
    assert P.above("a") == {"b", "c", "d"} and P.below("c") == {"a", "b"}
    assert P.comparable("a", "c") and not P.comparable("c", "d")
    assert interval(P, "a", "c") == {"a", "b", "c"}
    assert longest_chain(P, "a", "c") == 2
    assert P.is_ideal({"a", "b"}) and not P.is_ideal({"b"})
    assert P.induced(["a", "c"]).covers == frozenset({("a", "c")})


def test_poset_rejects_bad_input():
    with pytest.raises(PosetError):
        Poset.from_covers(["a", "b"], [("a", "b"), ("b", "a")])
    with pytest.raises(PosetError):
        Poset.from_covers(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")])
    with pytest.raises(PosetError):
        Poset.from_covers(["a"], [("a", "z")])
    with pytest.raises(PosetError):
        Poset.from_covers(["a", "a"], [])


def test_admissibility():
    FP, f = forman_edge()
    with pytest.raises(PosetError):
        check_admissible(FP.poset, {"v0": 1, "v1": 0, "e": 1})
    with pytest.raises(PosetError):
        check_admissible(FP.poset, {"v0": 1})


def test_forman_edge():
    FP, f = forman_edge()
    P = FP.poset
    assert violation_pairs(P, f) == [("v1", "e")]
    c = coherence(P, f)
    assert c.coherent and c.omega == 1
    cc = c_plus_minus(P, f)
    assert cc.c_plus["v1"] == "e" and cc.c_minus["e"] == "v1"
    rep = cminus_morse_report(FP, f)
    assert rep.critical == ["v0"]
    assert rep.sum1 == PolyZ([1]) and rep.certificate1 == PolyZ()
    assert rep.sum2 == PolyZ([1]) and rep.certificate2 == PolyZ()


def test_order_preserving_function_has_no_violations():
    FP = face_poset(simplex(2))
    f = dim_function(FP)
    P = FP.poset
    assert violation_pairs(P, f) == []
    c = coherence(P, f)
    assert c.coherent and c.omega == 0
    cc = c_plus_minus(P, f)
    assert all(cc.c_plus[x] == x and cc.c_minus[x] == x for x in P.elements)
    # every face is critical with its own dimension
    rep = cminus_morse_report(FP, f)
    assert rep.sum1 == PolyZ([3, 3, 1])
    assert rep.sum1 == rep.sum2


def test_dimension_function_on_the_tetrahedron_boundary():
    FP = face_poset(simplex_boundary(3))
    rep = cminus_morse_report(FP, dim_function(FP))
    assert rep.space_poly == PolyZ([1, 0, 1])
    assert rep.sum1 == PolyZ([4, 6, 4]) and rep.certificate1 == PolyZ([3, 3])
    assert rep.sum2 == PolyZ([4, 6, 4]) and rep.certificate2 == PolyZ([3, 3])


def test_incoherent_function_names_the_interval():
    P = Poset.from_relation("abc", [("a", "b"), ("b", "c")])
    f = {"a": 2.0, "b": 3.0, "c": 1.0}
    c = coherence(P, f)
    assert not c.coherent
    assert ("a", "c") in c.failures


def test_c_plus_fails_below_two_incomparable_drops():
    P = Poset.from_covers("xabc", [("x", "a"), ("x", "b"), ("a", "c"), ("b", "c")])
    f = {"x": 5.0, "a": 1.0, "b": 2.0, "c": 9.0}
    cc = c_plus_minus(P, f)
    assert cc.c_plus["x"] is None and not cc.plus_ok
    assert cc.minus_ok


def test_cminus_report_refuses_functions_violating_c_minus():
    # an edge below both of its vertices: S-(e) has two minimal elements
    FP, _ = forman_edge()
    f = {"v0": 0.0, "v1": 0.5, "e": -1.0}
    assert c_plus_minus(FP.poset, f).c_minus["e"] is None
    with pytest.raises(PosetError):
        cminus_morse_report(FP, f)


def test_face_poset_meets_are_validated():
    P = Poset.from_covers(["a", "b", "e"], [("a", "e"), ("b", "e")])
    with pytest.raises(PosetError):
        CWFacePoset.build(P, {"a": 0, "b": 0, "e": 0})
    with pytest.raises(PosetError):
        CWFacePoset.build(P, {"a": 0, "b": 0, "e": 1}, meets=[("a", "e", "b")])
    FP = CWFacePoset.build(P, {"a": 0, "b": 0, "e": 1}, meets=[("a", "e", "a"), ("b", "e", "b")])
    assert FP.meet("a", "b") is None and FP.meet_all(["a", "e"]) == "a"


def test_mplus_two_points_or_one():
    FP = face_poset(simplex(2))
    # both edges at v0 drop below it; their meet is v0 itself, so they span no edge
    f = dim_function(FP)
    f["(v0)"] = 1.5
    M = mplus_complex(FP, f, "(v0)")
    assert M.f_vector == (2,)
    assert poincare_polynomial(M, reduced=True) == PolyZ([1])
    # an edge above the triangle: V+ is the triangle alone
    g = dim_function(FP)
    g["(v0,v1)"] = 2.5
    assert mplus_complex(FP, g, "(v0,v1)").f_vector == (1,)


def test_mplus_matches_the_nerve_of_the_violation_set():
    rng = np.random.default_rng(0)
    for K in (simplex(2), simplex_boundary(3), simplex(3)):
        FP = face_poset(K)
        P = FP.poset
        checked = 0
        while checked < 60:
            f = perturbed(FP, rng)
            try:
                if not coherence(P, f).coherent:
                    continue
            except PosetError:
                continue
            for x in P.elements:
                vp, _ = violation_sets(P, f, x)
                if vp:
                    a = poincare_polynomial(mplus_complex(FP, f, x), reduced=True)
                    b = poincare_polynomial(nerve(P.sub(vp)), reduced=True)
                    assert a == b
            checked += 1


def test_poset_link_matches_the_flow_link_on_the_order_complex():
    rng = np.random.default_rng(1)
    for K in (simplex(2), simplex_boundary(3)):
        P = face_poset(K).poset
        N = nerve(P)
        for _ in range(10):
            f = dict(zip(P.elements, rng.permutation(len(P.elements)).astype(float)))
            O = orientation_from_function(N, f)
            for x in P.elements:
                assert poset_unstable_link(P, f, x).faces == unstable_link(N, O, x).faces
                L = unstable_link(N, O, x)
                expect = PolyZ([1]) if L.is_empty else poincare_polynomial(L, reduced=True).shift(1)
                assert poset_morse_polynomial(P, f, x) == expect


def test_regular_points_of_the_dimension_function():
    # no violations: each face sees its boundary below it, a sphere or the empty set
    FP = face_poset(simplex(2))
    rep = regular_points(FP.poset, dim_function(FP))
    assert all(r.verdict is Verdict.CRITICAL for r in rep.values())
    f = dim_function(FP)
    f["(v0)"] = 1.5
    assert regular_points(FP.poset, f)["(v2)"].verdict is Verdict.CRITICAL
    # a vertex above exactly one of its edges is regular: V+ is a single edge
    g = dim_function(FP)
    g["(v0)"] = 1.5
    g["(v0,v2)"] = 1.7
    assert regular_points(FP.poset, g)["(v0)"].verdict is Verdict.REGULAR


def random_ideal(P, rng):
    seeds = [x for x in P.elements if rng.random() < 0.3] or [P.elements[0]]
    out = set(seeds)
    for x in seeds:
        out |= P.below(x)
    return out


def test_c_minus_restricts_to_ideals():
    rng = np.random.default_rng(2)
    FP = face_poset(suspension(simplex_boundary(2)))
    P = FP.poset
    done = 0
    while done < 50:
        f = perturbed(FP, rng)
        try:
            if not c_plus_minus(P, f).minus_ok:
                continue
        except PosetError:
            continue
        I = random_ideal(P, rng)
        assert P.is_ideal(I)
        sub = P.induced(I)
        assert c_plus_minus(sub, {x: f[x] for x in I}).minus_ok
        done += 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_first_morse_inequality_for_random_c_minus_functions(seed):
    rng = np.random.default_rng(seed)
    FP = face_poset(simplex_boundary(3))
    f = perturbed(FP, rng)
    try:
        ok = c_plus_minus(FP.poset, f).minus_ok and coherence(FP.poset, f).coherent
    except PosetError:
        return
    if ok:
        rep = cminus_morse_report(FP, f)
        assert rep.certificate1 is not None
        assert rep.sum1(-1) == 2


def test_report_json_round_trip():
    FP, f = forman_edge()
    js = cminus_morse_report(FP, f).to_json()
    assert js["critical"] == ["v0"] and js["ok"] is True
    assert FP.poset.to_json()["covers"] == [["v0", "e"], ["v1", "e"]]
    assert nerve(face_poset(sphere0()).poset).f_vector == (2,)
