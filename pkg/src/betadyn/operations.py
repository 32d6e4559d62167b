"""Operation table shared by the HTTP service and the CLI.

Every operation takes a validated request model and returns a ``Result``;
``execute`` is what both the FastAPI routes and the in-process CLI call.
"""

from typing import Callable

from . import beta_symbolic as bs
from . import cantor_lab as cl
from . import cylinders as cy
from . import dimension_theory as dt
from . import orbit_exponents as oe
from . import schemas as sc
from .errors import BetaDynError, InvalidParams
from .precision_core import make_beta, parse_rational, parse_scalar, to_decimal_string


def _fr(v) -> str:
    return oe.format_exponent(v)


def _dec(x, digits: int) -> str:
    return to_decimal_string(x, digits)


# ---------------------------------------------------------------- beta / words

def op_expand(r: sc.ExpandRequest) -> sc.Result:
    beta = make_beta(r.beta)
    w = bs.greedy_expand(parse_scalar(r.x, beta), beta, r.n)
    return sc.Result(command="expand", payload={"word": str(w), "digits": list(w.digits)},
                     columns=["word"], rows=[[str(w)]])


def op_eps_star(r: sc.EpsStarRequest) -> sc.Result:
    beta = make_beta(r.beta)
    e = bs.eps_star_prefix(beta, r.n)
    one = bs.expansion_of_one(beta, r.n)
    payload = {"eps_star": bs.format_word(e.prefix, beta.digit_bound),
               "simple_parry": e.simple_parry, "certified": e.certified,
               "expansion_of_one": str(one.word)}
    return sc.Result(command="eps-star", payload=payload, columns=list(payload),
                     rows=[list(payload.values())])


def op_admissible(r: sc.AdmissibleRequest) -> sc.Result:
    beta = make_beta(r.beta)
    ok = bs.is_admissible(bs.parse_word(r.word), beta)
    return sc.Result(command="admissible", payload={"word": r.word, "admissible": ok},
                     columns=["word", "admissible"], rows=[[r.word, ok]])


def op_enumerate(r: sc.EnumerateRequest) -> sc.Result:
    beta = make_beta(r.beta)
    if r.count_only:
        c = bs.enumerate_admissible(beta, r.n, count_only=True)
        return sc.Result(command="enumerate", payload={"n": r.n, "count": c},
                         columns=["n", "count"], rows=[[r.n, c]])
    words = [bs.format_word(w, beta.digit_bound) for w in bs.enumerate_admissible(beta, r.n)]
    return sc.Result(command="enumerate", payload={"n": r.n, "count": len(words), "words": words},
                     columns=["word"], rows=[[w] for w in words])


def op_beta_n(r: sc.BetaNRequest) -> sc.Result:
    beta = make_beta(r.beta)
    bn = bs.solve_beta_n(beta, r.N)
    payload = {"N": r.N, "beta_N": _dec(bn.gen, r.digits), "polynomial": bn.text,
               "expansion_of_one": bs.format_word(bn.parry_expansion, beta.digit_bound)}
    return sc.Result(command="beta-n", payload=payload, columns=list(payload), rows=[list(payload.values())])


def _cyl_row(c: cy.Cylinder, digits: int) -> list:
    return [str(c.word), _dec(c.left, digits), _dec(c.right, digits), _dec(c.length, digits), c.is_full()]


CYL_COLUMNS = ["word", "left", "right", "length", "is_full"]


def op_cylinder(r: sc.CylinderRequest) -> sc.Result:
    beta = make_beta(r.beta)
    if r.full_extension is not None:
        c = cy.smallest_full_extension(bs.parse_word(r.word), beta, r.full_extension)
    else:
        c = cy.cylinder_interval(bs.parse_word(r.word), beta)
    row = _cyl_row(c, r.digits)
    return sc.Result(command="cylinder", payload=dict(zip(CYL_COLUMNS, row)), columns=CYL_COLUMNS, rows=[row])


def op_partition(r: sc.PartitionRequest) -> sc.Result:
    beta = make_beta(r.beta)
    cyls = cy.partition_level(beta, r.n)
    total = sum((c.length for c in cyls), beta.zero)
    rows = [_cyl_row(c, r.digits) for c in cyls]
    payload = {"n": r.n, "count": len(rows), "total_length_is_one": total == 1,
               "cylinders": [dict(zip(CYL_COLUMNS, row)) for row in rows]}
    return sc.Result(command="partition", payload=payload, columns=CYL_COLUMNS, rows=rows)


# ---------------------------------------------------------------- orbits and exponents

def op_orbit(r: sc.OrbitRequest) -> sc.Result:
    beta = make_beta(r.beta)
    o = oe.orbit(parse_scalar(r.x, beta), beta, r.n)
    pts = [_dec(p, r.digits) for p in o.points]
    return sc.Result(command="orbit", payload={"points": pts, "zero_hit": o.zero_hit},
                     columns=["n", "value"], rows=[[i, p] for i, p in enumerate(pts)])


def op_hits(r: sc.HitsRequest) -> sc.Result:
    beta = make_beta(r.beta)
    hits = oe.hitting_times(parse_scalar(r.x, beta), beta, oe.parse_speed(r.psi), r.horizon)
    return sc.Result(command="hits", payload={"hits": hits}, columns=["n"], rows=[[n] for n in hits])


def op_uniform(r: sc.UniformRequest) -> sc.Result:
    beta = make_beta(r.beta)
    res = oe.uniform_check(parse_scalar(r.x, beta), beta, oe.parse_speed(r.psi), range(r.n_from, r.n_to + 1))
    return sc.Result(command="uniform", payload={"checks": [[n, ok] for n, ok in res]},
                     columns=["N", "hit"], rows=[[n, ok] for n, ok in res])


def _stream(r: sc.ExponentsRequest) -> bs.DigitStream:
    if r.kind == "expansion":
        if r.beta is None or r.x is None:
            raise InvalidParams("expansion streams need beta and x")
        beta = make_beta(r.beta)
        return bs.expansion_stream(parse_scalar(r.x, beta), beta)
    params: dict = {}
    for key, val in r.params.items():
        if key in ("R", "c", "a"):
            params[key] = parse_rational(val)
        elif key == "blocks":
            params[key] = int(val)
        elif key == "repeats":
            params[key] = val.lower() not in ("0", "false", "no")
        else:
            params[key] = val
    return oe.witness_stream(r.kind, **params)


def op_exponents(r: sc.ExponentsRequest) -> sc.Result:
    est = oe.estimate_exponents(_stream(r), r.horizon)
    d = est.as_dict()
    return sc.Result(command="exponents", payload=d, columns=["nu", "nu_hat", "horizon", "note"],
                     rows=[[d["nu"], d["nu_hat"], d["horizon"], d["note"]]])


def op_psi_exp(r: sc.PsiExpRequest) -> sc.Result:
    psi = oe.parse_speed(r.psi)
    if r.mode == "numeric" and r.beta is not None:
        res = oe.psi_exponents_for_beta(psi, make_beta(r.beta), r.horizon)
    else:
        res = oe.psi_exponents(psi, r.horizon, r.mode)
    lo, hi = (_fr(res.lo), _fr(res.hi)) if r.mode == "exact" else (repr(res.lo), repr(res.hi))
    payload = {"lo": lo, "hi": hi, "mode": res.mode, "active_rules": list(res.active)}
    return sc.Result(command="psi-exp", payload=payload, columns=["lo", "hi", "mode"], rows=[[lo, hi, res.mode]])


# ---------------------------------------------------------------- dimension formulas

def _verdict(command: str, v: dt.DimensionVerdict) -> sc.Result:
    d = v.to_json()
    return sc.Result(command=command, payload=d, columns=list(d), rows=[list(d.values())])


def op_classify(r: sc.ClassifyRequest) -> sc.Result:
    q = oe.ExponentQuadruple.parse(r.q)
    res = _verdict("classify", dt.classify_bounds(q))
    res.payload["inclusion"] = dt.inclusion_verdict(q)
    return res


def op_classify_uniform(r: sc.ClassifyUniformRequest) -> sc.Result:
    return _verdict("classify-uniform",
                    dt.classify_uniform(oe.parse_exponent(r.v2_lo), oe.parse_exponent(r.v2_hi)))


def _scalar(command: str, name: str, value) -> sc.Result:
    text = value if isinstance(value, str) else _fr(value)
    return sc.Result(command=command, payload={name: text}, columns=[name], rows=[[text]])


def op_bl(r: sc.BLRequest) -> sc.Result:
    return _scalar("bl", "dimension", dt.bl_dimension(parse_rational(r.v), parse_rational(r.v_hat)))


def op_sw(r: sc.SWRequest) -> sc.Result:
    return _scalar("sw", "dimension", dt.sw_dimension(oe.parse_exponent(r.v)))


def op_s0(r: sc.S0Request) -> sc.Result:
    return _scalar("s0", "s0", dt.covering_critical_exponent(parse_rational(r.v), parse_rational(r.v2_lo)))


def op_examples(r: sc.ExamplesRequest) -> sc.Result:
    rows = dt.run_examples()
    cols = ["example", "quadruple", "case", "lower", "upper", "dimension", "audit"]
    data = [row.to_json() for row in rows]
    return sc.Result(command="examples", payload=data, columns=cols,
                     rows=[[d[c] for c in cols] for d in data])


# ---------------------------------------------------------------- cantor lab

def _schedule(r: sc.ScheduleRequest) -> cl.CantorSchedule:
    return cl.build_schedule(parse_rational(r.v), parse_rational(r.v_hat), parse_rational(r.delta), r.N, r.K)


def _template(r: sc.TemplateRequest) -> cl.Template:
    return cl.Template(_schedule(r), make_beta(r.beta), r.layout)


def op_cantor_schedule(r: sc.ScheduleRequest) -> sc.Result:
    s = _schedule(r)
    d = s.to_json()
    cols = ["k", "n", "m", "t", "gap", "l", "h"]
    rows = [[k + 1, s.n[k], s.m[k], s.t[k], s.gaps[k], s.l[k], s.h[k]] for k in range(s.K)]
    return sc.Result(command="cantor-schedule", payload=d, columns=cols, rows=rows)


def op_cantor_gen(r: sc.CantorGenRequest) -> sc.Result:
    t = _template(r)
    rows = []
    for w in t.words(r.depth, r.cap):
        cyl = cy.cylinder_interval(w, t.beta)
        m = t.measure(w)
        rows.append([r.depth, str(cyl.word), _dec(cyl.left, r.digits), _dec(cyl.length, r.digits),
                     f"{m.numerator}/{m.denominator}"])
    payload = {"depth": r.depth, "count": len(rows), "words": [row[1] for row in rows]}
    return sc.Result(command="cantor-gen", payload=payload,
                     columns=["level", "word", "left", "length", "mass"], rows=rows)


def op_cantor_measure(r: sc.CantorMeasureRequest) -> sc.Result:
    t = _template(r)
    m = t.measure(bs.parse_word(r.word))
    return _scalar("cantor-measure", "mass", m)


def op_localdim(r: sc.LocalDimRequest) -> sc.Result:
    s = _schedule(r)
    beta = make_beta(r.beta)
    series = cl.local_dimension_series(s, beta, layout=r.layout)
    target = cl.local_dimension_target(s, beta)
    return sc.Result(command="localdim", payload={"series": series, "target": target},
                     columns=["k", "ratio"], rows=[list(p) for p in series])


def op_boxcount(r: sc.BoxcountRequest) -> sc.Result:
    if r.synthetic == "middle-thirds":
        counts, scales = cl.middle_thirds_cover(max(r.levels))
        target = None
    elif r.synthetic == "binary":
        counts = [2 ** k for k in r.levels]
        scales = [k * 0.6931471805599453 for k in r.levels]
        target = None
    else:
        s = _schedule(r)
        beta = make_beta(r.beta)
        counts, scales = cl.milestone_cover(s, beta, r.levels, r.layout)
        target = cl.local_dimension_target(s, beta)
    slope, residual = cl.boxcount_estimate(counts, scales)
    payload = {"slope": slope, "residual": residual, "target": target}
    return sc.Result(command="boxcount", payload=payload, columns=["slope", "residual"], rows=[[slope, residual]])


def op_verify_membership(r: sc.VerifyRequest) -> sc.Result:
    s = _schedule(r)
    rep = cl.verify_membership(s, make_beta(r.beta), oe.parse_speed(r.psi1), oe.parse_speed(r.psi2),
                               count=r.count, seed=r.seed, layout=r.layout, start=r.start)
    d = rep.to_json()
    return sc.Result(command="verify-membership", payload=d,
                     columns=["sample", "kind", "position"],
                     rows=[[v["sample"], v["kind"], v.get("n", v.get("N"))] for v in rep.violations])


OPERATIONS: dict[str, tuple[type, Callable[..., sc.Result]]] = {
    "expand": (sc.ExpandRequest, op_expand),
    "eps-star": (sc.EpsStarRequest, op_eps_star),
    "admissible": (sc.AdmissibleRequest, op_admissible),
    "enumerate": (sc.EnumerateRequest, op_enumerate),
    "beta-n": (sc.BetaNRequest, op_beta_n),
    "cylinder": (sc.CylinderRequest, op_cylinder),
    "partition": (sc.PartitionRequest, op_partition),
    "orbit": (sc.OrbitRequest, op_orbit),
    "hits": (sc.HitsRequest, op_hits),
    "uniform": (sc.UniformRequest, op_uniform),
    "exponents": (sc.ExponentsRequest, op_exponents),
    "psi-exp": (sc.PsiExpRequest, op_psi_exp),
    "classify": (sc.ClassifyRequest, op_classify),
    "classify-uniform": (sc.ClassifyUniformRequest, op_classify_uniform),
    "bl": (sc.BLRequest, op_bl),
    "sw": (sc.SWRequest, op_sw),
    "s0": (sc.S0Request, op_s0),
    "cantor-schedule": (sc.ScheduleRequest, op_cantor_schedule),
    "cantor-gen": (sc.CantorGenRequest, op_cantor_gen),
    "cantor-measure": (sc.CantorMeasureRequest, op_cantor_measure),
    "localdim": (sc.LocalDimRequest, op_localdim),
    "boxcount": (sc.BoxcountRequest, op_boxcount),
    "verify-membership": (sc.VerifyRequest, op_verify_membership),
    "examples": (sc.ExamplesRequest, op_examples),
}


def execute(command: str, request) -> sc.Result:
    model, fn = OPERATIONS[command]
    if not isinstance(request, model):
        request = model.model_validate(request)
    return fn(request)


def error_out(exc: BetaDynError) -> sc.ErrorOut:
    return sc.ErrorOut(error=exc.code, message=str(exc), exit_code=exc.exit_code)
