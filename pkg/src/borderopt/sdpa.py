"""SDPA sparse format (.dat-s) export and solution import.

SDPA's primal is ``min c·x  s.t.  Σ x_i F_i − F_0 ⪰ 0``, which is the
moment form with ``x = λ`` and ``F_0`` negated.  The objective's constant
term is not representable, so it goes into a ``*`` comment line and is
added back on import.  Equality rows become one diagonal block holding
each row twice with opposite signs.
"""
from __future__ import annotations

import re
import shutil
import subprocess
from pathlib import Path

import numpy as np

from .sdpsolve import SdpProblem, SdpSolution, Status


class ParseError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


_SEP = re.compile(r"[,{}()]")


def _fmt(v: float) -> str:
    return repr(float(v))


def export_sdpa(prob: SdpProblem, path) -> Path:
    """Write ``prob`` as a .dat-s file and return the path."""
    path = Path(path)
    m = prob.nids - 1
    blocks = [b for b in prob.blocks]
    E = prob.equality_rows
    sizes = [b.shape[1] for b in blocks]
    if E.shape[0]:
        sizes.append(-2 * E.shape[0])
    lines = [
        '"moment relaxation exported by borderopt"',
        f"* constant {_fmt(prob.objective[0])}",
        str(m),
        str(len(sizes)),
        " ".join(str(s) for s in sizes),
        " ".join(_fmt(c) for c in prob.objective[1:]) if m else "",
    ]
    for k, b in enumerate(blocks, start=1):
        for mat in range(m + 1):
            F = -b[0] if mat == 0 else b[mat]
            iu, ju = np.nonzero(np.triu(F))
            for i, j in zip(iu, ju):
                lines.append(f"{mat} {k} {i + 1} {j + 1} {_fmt(F[i, j])}")
    if E.shape[0]:
        k = len(blocks) + 1
        for mat in range(m + 1):
            col = -E[:, 0] if mat == 0 else E[:, mat]
            for r, v in enumerate(col):
                if v != 0:
                    lines.append(f"{mat} {k} {2 * r + 1} {2 * r + 1} {_fmt(v)}")
                    lines.append(f"{mat} {k} {2 * r + 2} {2 * r + 2} {_fmt(-v)}")
    path.write_text("\n".join(lines) + "\n")
    return path


def _numbers(text: str, lineno: int, kind=float) -> list:
    try:
        return [kind(tok) for tok in _SEP.sub(" ", text).split()]
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


def read_sdpa(path) -> SdpProblem:
    """Parse a .dat-s file back into an :class:`SdpProblem`.

    A trailing all-diagonal block whose rows come in ``(v, -v)`` pairs is
    read back as equality rows, mirroring :func:`export_sdpa`.
    """
    raw = Path(path).read_text().splitlines()
    const = 0.0
    body = []
    for no, line in enumerate(raw, start=1):
        s = line.strip()
        if s.startswith("* constant"):
            const = _numbers(s[len("* constant"):], no)[0]
            continue
        if not s or s[0] in '"*':
            continue
        body.append((no, s))

    def header(k, kind=int):
        if k >= len(body):
            raise ParseError("unexpected end of header", len(raw) or 1)
        no, s = body[k]
        vals = []
        for tok in _SEP.sub(" ", s).split():
            try:
                vals.append(kind(tok))
            except ValueError:
                break  # trailing annotation such as "=mDIM"
        if not vals:
            raise ParseError(f"expected a number, got {s!r}", no)
        return no, vals

    no, vals = header(0)
    m = vals[0]
    if m < 0:
        raise ParseError("negative mDIM", no)
    _, vals = header(1)
    nblock = vals[0]
    no, struct = header(2)
    struct = struct[:nblock]
    if len(struct) != nblock or 0 in struct:
        raise ParseError(f"blockStruct {struct} does not match nBLOCK {nblock}", no)
    k = 3
    c = []
    if m:
        no, c = header(3, float)
        c = c[:m]
        if len(c) != m:
            raise ParseError(f"objective has {len(c)} entries, mDIM is {m}", no)
        k = 4
    mats = [np.zeros((m + 1, abs(s), abs(s))) for s in struct]
    for no, s in body[k:]:
        vals = _numbers(s, no)
        if len(vals) != 5:
            raise ParseError("expected 'matno blkno i j value'", no)
        mat, blk, i, j, v = int(vals[0]), int(vals[1]), int(vals[2]) - 1, int(vals[3]) - 1, vals[4]
        if not (0 <= mat <= m and 1 <= blk <= nblock):
            raise ParseError("matrix or block index out of range", no)
        size = abs(struct[blk - 1])
        if not (0 <= i < size and 0 <= j < size):
            raise ParseError("entry index out of range", no)
        if struct[blk - 1] < 0 and i != j:
            raise ParseError("off-diagonal entry in a diagonal block", no)
        mats[blk - 1][mat, i, j] = v
        mats[blk - 1][mat, j, i] = v
    for T in mats:
        T[0] = -T[0]

    eq = np.zeros((0, m + 1))
    if struct and struct[-1] < 0:
        D = np.array([np.diag(T) for T in mats[-1]])  # (m+1, size)
        if D.shape[1] % 2 == 0 and np.array_equal(D[:, 0::2], -D[:, 1::2]):
            eq = D[:, 0::2].T.copy()
            mats = mats[:-1]
    return SdpProblem(blocks=mats, objective=np.concatenate([[const], c]), equality_rows=eq)


_PHASE = {
    "pdOPT": Status.OPTIMAL,
    "pINF": Status.INFEASIBLE,
    "pINF_dFEAS": Status.INFEASIBLE,
    "dUNBD": Status.INFEASIBLE,
    "pUNBD": Status.UNBOUNDED,
    "dINF": Status.UNBOUNDED,
    "pFEAS_dINF": Status.UNBOUNDED,
}


def write_sdpa_solution(sol: SdpSolution, path) -> Path:
    """Write an SDPA-7 style result file carrying the vector ``xVec``."""
    path = Path(path)
    phase = "pdOPT" if sol.status == Status.OPTIMAL else {
        Status.INFEASIBLE: "pINF", Status.UNBOUNDED: "pUNBD"}.get(sol.status, "noINFO")
    lam = sol.moments[1:]
    text = (
        f"phase.value  = {phase}\n"
        f"objValPrimal = {_fmt(sol.primal_objective)}\n"
        f"objValDual   = {_fmt(sol.dual_objective)}\n"
        "xVec = \n{" + ",".join(_fmt(v) for v in lam) + "}\n"
    )
    path.write_text(text)
    return path


def import_sdpa_solution(prob: SdpProblem, path) -> SdpSolution:
    """Read an SDPA result file; moments are rebuilt from ``xVec`` (or ``yVec``)."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ParseError("empty solution file", 1)
    status = Status.SLOW_PROGRESS
    seen_phase = False
    vec = None
    i = 0
    while i < len(lines):
        s = lines[i].strip()
        if s.startswith("phase.value"):
            seen_phase = True
            word = s.split("=", 1)[-1].strip()
            status = _PHASE.get(word, Status.SLOW_PROGRESS)
        elif re.match(r"^[xy]Vec\s*=", s):
            start = i + 1
            chunk = s.split("=", 1)[1]
            while "}" not in chunk:
                i += 1
                if i >= len(lines):
                    raise ParseError("unterminated vector", start)
                chunk += " " + lines[i]
            if "{" not in chunk:
                raise ParseError("vector must be enclosed in braces", start)
            vec = np.array(_numbers(chunk, start))
        i += 1
    if not seen_phase and vec is None:
        raise ParseError("no 'phase.value' or 'xVec' section", 1)
    if vec is None:
        raise ParseError("no 'xVec' section", len(lines))
    if vec.size != prob.nids - 1:
        raise ParseError(f"vector has {vec.size} entries, problem has {prob.nids - 1}", len(lines))
    moments = np.concatenate([[1.0], vec])
    val = float(prob.objective @ moments)
    return SdpSolution(
        status=status,
        primal_objective=val,
        dual_objective=val,
        moments=moments,
        blocks=prob.block_values(moments),
        labels=prob.labels,
    )


def solve_external(prob: SdpProblem, workdir, name: str = "relaxation", binary: str = "sdpa") -> SdpSolution:
    """Export, run ``binary`` if it is on PATH, and import the result.

    Without the binary, a result file already sitting next to the export
    (``<name>.out``) is imported instead; otherwise FileNotFoundError.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    dat = export_sdpa(prob, workdir / f"{name}.dat-s")
    out = workdir / f"{name}.out"
    exe = shutil.which(binary)
    if exe:
        subprocess.run([exe, str(dat), str(out)], check=True, capture_output=True)
    if not out.exists():
        raise FileNotFoundError(f"no '{binary}' on PATH and no result file {out}")
    return import_sdpa_solution(prob, out)
