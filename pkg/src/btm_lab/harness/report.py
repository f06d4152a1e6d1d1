"""Plain-text summary of one or more run records."""

from __future__ import annotations

from .runner import RunRecord

# what each suite checks, in words
STATEMENTS = {
    "events": "A and B events imply E; max/sum ratio on the localisation event",
    "lemma3": "two-factor lower bound on P(X_t = x) at a deep trap",
    "corollary4": "P(X_{t_n} = x_n) above the localisation bound on E_loc",
    "nearbound": "sup of P(X_{t_n} = .) near the origin below 4 eps on E_deloc; heat-kernel bounds",
    "confinement": "mean exit time sandwich and survival above 1/32; counting sequence b_k",
    "laplace": "Laplace-transform asymptotics and the sum-tail bound",
    "pmf": "reflecting and absorbing sups agree within the deficit",
    "solver": "backend agreement, conservation, stationarity, Monte Carlo band",
    "hitting": "closed-form hitting and exit functionals against linear solves",
    "maxsum": "max/sum ratio reaches high and low thresholds (finite-n proxy)",
    "scaling": "stable scaling self-consistency",
    "finite_mean": "sup of the pmf decays diffusively when the traps have finite mean",
}


class EmptyReport(ValueError):
    pass


def report(records: list[RunRecord]) -> tuple[str, bool]:
    """Return the summary text and the conjunction of all non-vacuous verdicts."""
    if not records:
        raise EmptyReport("no run records given")
    lines = []
    ok = True
    for rec in records:
        if not rec.suites:
            raise EmptyReport(f"run {rec.config_hash} has no suites")
        lines.append(f"run {rec.config_hash}  version {rec.version}  {rec.started} .. {rec.finished}")
        lines.append(f"{'suite':<12} {'check':<34} {'status':<10} {'margin':>12}")
        vacuous, unasserted = [], []
        for suite, body in rec.suites.items():
            ok &= bool(body["passed"])
            grouped = {}
            for c in body["checks"]:
                grouped.setdefault((c["id"], c["status"]), []).append(c)
            for (cid, status), cs in grouped.items():
                worst = min(_num(c["margin"]) for c in cs)
                row = f"{suite:<12} {cid:<34} {status:<10} {worst:>12.4g}" + (f"  x{len(cs)}" if len(cs) > 1 else "")
                if status == "vacuous":
                    vacuous.append(row)
                elif status == "unasserted":
                    unasserted.append(row)
                else:
                    lines.append(row)
        if vacuous:
            lines.append("vacuous (reported, not counted as passes):")
            lines += ["  " + r for r in vacuous]
        if unasserted:
            lines.append("reported only (no assertion):")
            lines += ["  " + r for r in unasserted]
        lines.append("suites:")
        for suite, body in rec.suites.items():
            c = body["counts"]
            lines.append(f"  {suite:<12} {'PASS' if body['passed'] else 'FAIL'}  pass={c['pass']} fail={c['fail']} "
                         f"vacuous={c['vacuous']} unasserted={c['unasserted']}  {STATEMENTS.get(suite, '')}")
        lines.append("")
    lines.append("overall: " + ("PASS" if ok else "FAIL"))
    return "\n".join(lines) + "\n", ok


def _num(v) -> float:
    try:
        return float(v)
    except (TypeError, ValueError):
        return float("nan")
