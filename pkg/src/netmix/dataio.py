"""File formats and deterministic artifact I/O.

Formats:
  manifest CSV     header ``subject_id,label,path``; paths are resolved
                   relative to the manifest's directory.
  adjacency file   either a dense V x V CSV of 0/1 integers (symmetric,
                   diagonal ignored) or an edge list whose first content
                   line is ``V=<n>`` followed by ``v,u`` pairs (1-based).
  node metadata    CSV ``name,hemisphere,lobe`` with one row per node in
                   node order; hemisphere must be L, R, or other.
  config           ``key = value`` lines, ``#`` comments; unknown keys are
                   rejected.
  draws archive    custom binary container (magic, version, JSON header,
                   raw arrays). np.savez is avoided on purpose: zip
                   embeds timestamps and would break byte-identical
                   reruns.

All writers go through an atomic temp-file + rename and never embed
timestamps, so identical inputs produce identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import NetworkObservation, edge_index_map, matricize
from .core import vectorize as vectorize_adjacency
from .inference import PosteriorDraws
from .testing import ClassificationResult, TestReport

__all__ = [
    "NetmixError",
    "DataFormatError",
    "ConfigError",
    "ArchiveError",
    "NodeMetadata",
    "DatasetManifest",
    "load_dataset",
    "load_node_metadata",
    "read_adjacency_file",
    "write_dataset",
    "parse_config",
    "save_draws",
    "load_draws",
    "save_test_report",
    "load_test_report",
    "write_edge_table",
    "write_degree_table",
    "write_difference_matrix",
    "write_predictions",
    "save_classification",
    "render_report",
    "atomic_write_text",
    "atomic_write_bytes",
]


class NetmixError(Exception):
    """Base for errors the command line reports as one-line diagnostics."""


class DataFormatError(NetmixError):
    pass


class ConfigError(NetmixError):
    pass


class ArchiveError(NetmixError):
    pass


HEMISPHERES = ("L", "R", "other")


@dataclass(frozen=True)
class NodeMetadata:
    """Anatomical labels for one node."""

    name: str
    hemisphere: str
    lobe: str

    def __post_init__(self):
        if self.hemisphere not in HEMISPHERES:
            raise DataFormatError(
                f"hemisphere must be one of {HEMISPHERES}, got {self.hemisphere!r}")


@dataclass(frozen=True)
class DatasetManifest:
    """What a cohort was loaded from: (subject_id, label, path) triples,
    the node count, and node metadata when supplied."""

    subjects: tuple[tuple[str, int, str], ...]
    V: int
    node_metadata: tuple[NodeMetadata, ...] | None = None


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _content_lines(path) -> list[str]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc.strerror or exc}") from exc
    lines = []
    for line in raw.splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            lines.append(body)
    return lines


def read_adjacency_file(path) -> np.ndarray:
    """Edge vector from a dense CSV matrix or a V=<n> edge list."""
    lines = _content_lines(path)
    if not lines:
        raise DataFormatError(f"{path}: empty adjacency file")
    first = lines[0].replace(" ", "")
    if first.upper().startswith("V="):
        return _read_edge_list(path, lines)
    return _read_dense(path, lines)


def _read_edge_list(path, lines: list[str]) -> np.ndarray:
    head = lines[0].replace(" ", "")
    try:
        V = int(head[2:])
    except ValueError:
        raise DataFormatError(f"{path}: malformed node count line {lines[0]!r}")
    if V < 2:
        raise DataFormatError(f"{path}: need at least 2 nodes, got V={V}")
    emap = edge_index_map(V)
    edges = np.zeros(emap.L, dtype=np.int8)
    for line in lines[1:]:
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise DataFormatError(f"{path}: expected 'v,u', got {line!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise DataFormatError(f"{path}: non-integer node in {line!r}")
        if a == b or not (1 <= a <= V and 1 <= b <= V):
            raise DataFormatError(
                f"{path}: node pair ({a}, {b}) invalid for V={V}")
        v, u = max(a, b), min(a, b)
        edges[emap.edge_index(v, u) - 1] = 1
    return edges


def _read_dense(path, lines: list[str]) -> np.ndarray:
    rows = []
    for i, line in enumerate(lines):
        cells = [c.strip() for c in line.split(",")]
        try:
            rows.append([int(c) for c in cells])
        except ValueError:
            raise DataFormatError(f"{path}: non-integer entry in row {i + 1}")
    V = len(rows)
    for i, row in enumerate(rows):
        if len(row) != V:
            raise DataFormatError(
                f"{path}: row {i + 1} has {len(row)} columns, expected {V}")
    A = np.array(rows)
    bad = (A != 0) & (A != 1) & ~np.eye(V, dtype=bool)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise DataFormatError(f"{path}: entry {A[r, c]} at row {r + 1}, "
                              f"column {c + 1} is not 0 or 1")
    try:
        return vectorize_adjacency(A)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def load_node_metadata(path) -> tuple[NodeMetadata, ...]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc.strerror or exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["name", "hemisphere", "lobe"]:
        raise DataFormatError(
            f"{path}: expected header 'name,hemisphere,lobe', got {header!r}")
    nodes = []
    for row in reader:
        if not row or not "".join(row).strip():
            continue
        if len(row) != 3:
            raise DataFormatError(f"{path}: malformed row {row!r}")
        nodes.append(NodeMetadata(name=row[0].strip(),
                                  hemisphere=row[1].strip(),
                                  lobe=row[2].strip()))
    if not nodes:
        raise DataFormatError(f"{path}: no node rows")
    return tuple(nodes)


def load_dataset(manifest_path, metadata_path=None):
    """Read a manifest and every adjacency file it references.

    Returns (observations, DatasetManifest). All subjects must share one
    node count; node metadata, when given, must have exactly V rows.
    """
    manifest_path = Path(manifest_path)
    try:
        text = manifest_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"{manifest_path}: {exc.strerror or exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["subject_id", "label", "path"]:
        raise DataFormatError(f"{manifest_path}: expected header "
                              f"'subject_id,label,path', got {header!r}")
    entries = []
    seen = set()
    for row in reader:
        if not row or not "".join(row).strip():
            continue
        if len(row) != 3:
            raise DataFormatError(f"{manifest_path}: malformed row {row!r}")
        sid, label_s, rel = (c.strip() for c in row)
        if label_s not in ("0", "1"):
            raise DataFormatError(
                f"{manifest_path}: label for {sid!r} must be 0 or 1, got {label_s!r}")
        if sid in seen:
            raise DataFormatError(f"{manifest_path}: duplicate subject id {sid!r}")
        seen.add(sid)
        entries.append((sid, int(label_s), rel))
    if not entries:
        raise DataFormatError(f"{manifest_path}: no subjects listed")

    observations = []
    V = None
    for sid, label, rel in entries:
        edges = read_adjacency_file(manifest_path.parent / rel)
        obs = NetworkObservation(edges=edges, label=label, subject_id=sid)
        if V is None:
            V = obs.V
        elif obs.V != V:
            raise DataFormatError(
                f"{manifest_path}: subject {sid!r} has {obs.V} nodes, "
                f"others have {V}")
        observations.append(obs)

    metadata = None
    if metadata_path is not None:
        metadata = load_node_metadata(metadata_path)
        if len(metadata) != V:
            raise DataFormatError(
                f"{metadata_path}: {len(metadata)} node rows but networks "
                f"have V={V} nodes")
    manifest = DatasetManifest(subjects=tuple(entries), V=V,
                               node_metadata=metadata)
    return observations, manifest


def write_dataset(out_dir, observations) -> Path:
    """Write adjacency CSVs and a manifest for a simulated cohort.

    Returns the manifest path. Files land in out_dir/networks/.
    """
    out_dir = Path(out_dir)
    rows = []
    for obs in observations:
        rel = f"networks/{obs.subject_id}.csv"
        A = matricize(obs.edges)
        text = "\n".join(",".join(str(int(x)) for x in row) for row in A) + "\n"
        atomic_write_text(out_dir / rel, text)
        rows.append(f"{obs.subject_id},{obs.label},{rel}")
    manifest_path = out_dir / "manifest.csv"
    atomic_write_text(manifest_path,
                      "subject_id,label,path\n" + "\n".join(rows) + "\n")
    return manifest_path


# configuration files

_INT_KEYS = {"v", "n0", "n1", "h", "r", "n_iter", "burn_in", "thin", "seed",
             "clique_size"}
_FLOAT_KEYS = {"a0", "a1", "z_mean", "z_var", "mig_a1", "mig_a2",
               "dirichlet_conc", "prior_t1", "shift", "low", "high", "weight",
               "share"}
_BOOL_KEYS = {"record_pi"}
_STR_KEYS = {"scenario"}
CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _STR_KEYS

SCENARIOS = ("prior", "shifted", "null", "clique", "separable", "rank1")


def parse_config(path) -> dict:
    """key = value file to a typed dict; unknown keys and bad values raise."""
    out = {}
    for line in _content_lines(path):
        if "=" not in line:
            raise ConfigError(f"{path}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        if key in out:
            raise ConfigError(f"{path}: duplicate config key {key!r}")
        try:
            if key in _INT_KEYS:
                out[key] = int(value)
            elif key in _FLOAT_KEYS:
                out[key] = float(value)
            elif key in _BOOL_KEYS:
                if value.lower() not in ("true", "false", "0", "1"):
                    raise ValueError(value)
                out[key] = value.lower() in ("true", "1")
            else:
                out[key] = value
        except ValueError:
            raise ConfigError(f"{path}: bad value {value!r} for key {key!r}")
    if "scenario" in out and out["scenario"] not in SCENARIOS:
        raise ConfigError(f"{path}: scenario must be one of {SCENARIOS}, "
                          f"got {out['scenario']!r}")
    return out


# draws archive

_MAGIC = b"NMXDRAWS"
_VERSION = 1
_ARRAY_ORDER = ("Z", "X", "lam", "theta", "nu", "pY1", "T", "assignments",
                "log_joint_trace")


def save_draws(draws: PosteriorDraws, path) -> None:
    """Serialize posterior draws to the versioned binary container.

    Byte-identical for identical draws: the header is canonical JSON and
    arrays are written in a fixed order with explicit dtypes. Recorded
    per-draw edge probabilities (pi) are not stored; they are recomputable.
    """
    arrays = []
    header_arrays = []
    for name in _ARRAY_ORDER:
        arr = np.ascontiguousarray(getattr(draws, name))
        arrays.append(arr)
        header_arrays.append({"name": name, "dtype": arr.dtype.str,
                              "shape": list(arr.shape)})
    header = {"arrays": header_arrays, "meta": draws.meta}
    header_bytes = json.dumps(header, sort_keys=True,
                              separators=(",", ":")).encode("utf-8")
    parts = [_MAGIC,
             np.uint32(_VERSION).tobytes(),
             np.uint64(len(header_bytes)).tobytes(),
             header_bytes]
    parts.extend(arr.tobytes() for arr in arrays)
    atomic_write_bytes(path, b"".join(parts))


def load_draws(path) -> PosteriorDraws:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise ArchiveError(f"{path}: {exc.strerror or exc}") from exc
    if len(blob) < len(_MAGIC) + 12 or not blob.startswith(_MAGIC):
        raise ArchiveError(f"{path}: not a draws archive")
    off = len(_MAGIC)
    version = int(np.frombuffer(blob, np.uint32, 1, off)[0])
    if version != _VERSION:
        raise ArchiveError(f"{path}: unsupported archive version {version}")
    off += 4
    hlen = int(np.frombuffer(blob, np.uint64, 1, off)[0])
    off += 8
    if off + hlen > len(blob):
        raise ArchiveError(f"{path}: truncated archive header")
    try:
        header = json.loads(blob[off:off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArchiveError(f"{path}: corrupt archive header") from exc
    off += hlen

    fields = {}
    listed = [spec["name"] for spec in header.get("arrays", [])]
    if listed != list(_ARRAY_ORDER):
        raise ArchiveError(f"{path}: unexpected archive contents {listed}")
    for spec in header["arrays"]:
        dtype = np.dtype(spec["dtype"])
        shape = tuple(spec["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * dtype.itemsize
        if off + nbytes > len(blob):
            raise ArchiveError(f"{path}: truncated array {spec['name']!r}")
        arr = np.frombuffer(blob, dtype, count, off).reshape(shape).copy()
        fields[spec["name"]] = arr
        off += nbytes
    if off != len(blob):
        raise ArchiveError(f"{path}: trailing bytes after arrays")
    return PosteriorDraws(meta=header["meta"], pi=None, **fields)


# test report artifacts

def _report_dict(report: TestReport) -> dict:
    return {
        "pr_H1": report.pr_H1,
        "epsilon": report.epsilon,
        "decision_cutoff": report.decision_cutoff,
        "rho_exceed": [float(x) for x in report.rho_exceed],
        "edge_diff": [float(x) for x in report.edge_diff],
        "significant_edges": [int(x) for x in report.significant_edges],
    }


def save_test_report(report: TestReport, path) -> None:
    atomic_write_text(path, json.dumps(_report_dict(report), sort_keys=True,
                                       separators=(",", ": ")) + "\n")


def load_test_report(path) -> TestReport:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not a JSON test report") from exc
    try:
        return TestReport(
            pr_H1=payload["pr_H1"],
            rho_exceed=np.asarray(payload["rho_exceed"], dtype=np.float64),
            epsilon=float(payload["epsilon"]),
            edge_diff=np.asarray(payload["edge_diff"], dtype=np.float64),
            significant_edges=np.asarray(payload["significant_edges"], dtype=bool),
            decision_cutoff=float(payload["decision_cutoff"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: malformed test report ({exc})") from exc


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def write_edge_table(report: TestReport, path,
                     metadata: tuple[NodeMetadata, ...] | None = None) -> None:
    """Per-edge CSV: linear index, node pair (1-based, with names when
    metadata is present), exceedance probability, mean difference, flag."""
    emap = edge_index_map(report.V)
    cols = "edge,v,u,rho_exceed,edge_diff,significant"
    if metadata is not None:
        cols += ",v_name,u_name"
    lines = [cols]
    for l in range(report.L):
        v, u = int(emap.rows0[l]) + 1, int(emap.cols0[l]) + 1
        row = (f"{l + 1},{v},{u},{_fmt(report.rho_exceed[l])},"
               f"{_fmt(report.edge_diff[l])},{int(report.significant_edges[l])}")
        if metadata is not None:
            row += f",{metadata[v - 1].name},{metadata[u - 1].name}"
        lines.append(row)
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_degree_table(degrees: np.ndarray, path,
                       metadata: tuple[NodeMetadata, ...] | None = None) -> None:
    """Per-node count of flagged edges, with anatomy columns when known."""
    cols = "node,degree" if metadata is None else "node,name,hemisphere,lobe,degree"
    lines = [cols]
    for v in range(degrees.shape[0]):
        if metadata is None:
            lines.append(f"{v + 1},{int(degrees[v])}")
        else:
            md = metadata[v]
            lines.append(f"{v + 1},{md.name},{md.hemisphere},{md.lobe},"
                         f"{int(degrees[v])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_difference_matrix(report: TestReport, path) -> None:
    """V x V matrix of posterior mean edge-probability differences."""
    M = matricize(report.edge_diff, report.V)
    text = "\n".join(",".join(_fmt(x) for x in row) for row in M) + "\n"
    atomic_write_text(path, text)


def write_predictions(result: ClassificationResult, path) -> None:
    lines = ["subject_id,label,prob_group1,predicted"]
    for i, sid in enumerate(result.subject_ids):
        lines.append(f"{sid},{int(result.labels[i])},"
                     f"{_fmt(result.probabilities[i])},{int(result.predicted[i])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def save_classification(auc: float, accuracy: float, n: int, path) -> None:
    payload = {"auc": auc, "accuracy": accuracy, "n_subjects": n,
               "threshold": 0.5}
    atomic_write_text(path, json.dumps(payload, sort_keys=True,
                                       separators=(",", ": ")) + "\n")


def render_report(fit_meta: dict | None = None,
                  test_report: TestReport | None = None,
                  classification: dict | None = None) -> str:
    """Markdown summary of whichever artifacts exist."""
    lines = ["# Cohort analysis summary", ""]
    if fit_meta is not None:
        n0, n1 = fit_meta.get("n0"), fit_meta.get("n1")
        sampler = fit_meta.get("sampler", {})
        lines += [
            "## Fit",
            "",
            f"- subjects: {fit_meta.get('n')} (group 0: {n0}, group 1: {n1})",
            f"- nodes: {fit_meta.get('V')}, edges: {fit_meta.get('L')}",
            f"- mixture components: {fit_meta.get('H')}, rank: {fit_meta.get('R')}",
            f"- iterations: {sampler.get('n_iter')} "
            f"(burn-in {sampler.get('burn_in')}, thin {sampler.get('thin')}, "
            f"seed {sampler.get('seed')})",
            f"- data checksum: {fit_meta.get('data_checksum')}",
            "",
        ]
    if test_report is not None:
        n_sig = int(test_report.significant_edges.sum())
        pr = ("not available (single-group cohort)" if test_report.pr_H1 is None
              else _fmt(test_report.pr_H1))
        lines += [
            "## Group comparison",
            "",
            f"- posterior probability of group dependence: {pr}",
            f"- relevance threshold epsilon: {_fmt(test_report.epsilon)}",
            f"- decision cutoff: {_fmt(test_report.decision_cutoff)}",
            f"- flagged edges: {n_sig} of {test_report.L}",
            "",
        ]
    if classification is not None:
        lines += [
            "## Classification",
            "",
            f"- subjects scored: {classification.get('n_subjects')}",
            f"- AUC: {_fmt(classification['auc'])}",
            f"- accuracy at 0.5: {_fmt(classification['accuracy'])}",
            "",
        ]
    if fit_meta is None and test_report is None and classification is None:
        lines += ["No artifacts found.", ""]
    return "\n".join(lines)
