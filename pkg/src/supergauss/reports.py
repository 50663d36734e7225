"""Byte-stable CSV and JSON rendering of estimates and certificates.

Floats are written with ``repr`` (shortest round-trip form), so identical
runs -- including runs on different worker-thread counts -- produce
byte-identical files.  CSV layouts are versioned in a leading comment line.
"""

from __future__ import annotations

import json
import math

from .certificates import Certificate
from .estimator import ConvergenceReport, EstimateRecord

CSV_VERSION = "# supergauss v1"


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _sanitize(obj):
    """Replace non-finite floats with None so documents stay strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def record_row(rec: EstimateRecord, bound: float, verdict: str) -> str:
    return ",".join([str(rec.n), str(rec.samples), _fmt(rec.mean),
                     _fmt(rec.stderr), _fmt(bound), verdict])


def convergence_csv(report: ConvergenceReport) -> str:
    lines = [CSV_VERSION, "n,samples,mean,stderr,bound,verdict"]
    for rec in report.records:
        lines.append(record_row(rec, report.bound, report.verdict))
    return "\n".join(lines) + "\n"


def record_dict(rec: EstimateRecord) -> dict:
    return {"n": rec.n, "samples": rec.samples, "mean": rec.mean,
            "variance": rec.variance, "stderr": rec.stderr, "seed": rec.seed,
            "overflow_count": rec.overflow_count}


def convergence_json(report: ConvergenceReport) -> str:
    doc = {
        "verdict": report.verdict,
        "flags": list(report.flags),
        "plateau": None if report.plateau is None else
                   {"n": report.plateau[0], "value": report.plateau[1]},
        "bound": report.bound if math.isfinite(report.bound) else None,
        "certificate": report.certificate.to_dict() if report.certificate else None,
        "records": [record_dict(r) for r in report.records],
    }
    return json.dumps(_sanitize(doc), indent=2, sort_keys=True) + "\n"


def certificate_json(cert: Certificate) -> str:
    return json.dumps(_sanitize(cert.to_dict()), indent=2, sort_keys=True) + "\n"


def tailbound_csv(rows) -> str:
    """rows: iterables of (n, R, mc_mean, mc_stderr, recursion_bound, zeta_bound),
    zeta_bound None below the validity threshold."""
    lines = [CSV_VERSION + " tailbound", "n,R,mc,stderr,recursion_bound,zeta_bound"]
    for n, big_r, mc, se, rec_b, zeta_b in rows:
        lines.append(",".join([str(n), _fmt(float(big_r)), _fmt(mc), _fmt(se),
                               _fmt(rec_b), "" if zeta_b is None else _fmt(zeta_b)]))
    return "\n".join(lines) + "\n"


def tailbound_json(rows) -> str:
    doc = [{"n": n, "R": float(big_r), "mc": mc, "stderr": se,
            "recursion_bound": rec_b, "zeta_bound": zeta_b}
           for n, big_r, mc, se, rec_b, zeta_b in rows]
    return json.dumps(_sanitize(doc), indent=2, sort_keys=True) + "\n"


def sweep_summary_csv(alphas, reports) -> str:
    lines = [CSV_VERSION + " phi4", "alpha,n,samples,mean,stderr,verdict,flags"]
    for alpha, rep in zip(alphas, reports):
        if rep.records:
            last = rep.records[-1]
            vals = [str(last.n), str(last.samples), _fmt(last.mean), _fmt(last.stderr)]
        else:
            vals = ["", "", "", ""]
        lines.append(",".join([_fmt(float(alpha))] + vals +
                              [rep.verdict, "|".join(rep.flags)]))
    return "\n".join(lines) + "\n"
