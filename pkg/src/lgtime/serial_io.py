"""Serialization for spectra, correlators, LG curves, trajectories, and raw
I/Q records.

CSV files open with '#'-prefixed provenance lines holding a JSON object (the
record's meta plus anything the caller adds), so every emitted file carries
its parameters.  Raw records are interleaved I/Q float64 binaries with a JSON
sidecar describing layout.
"""

import json
from pathlib import Path

import numpy as np

from .analytic_spectrum import (
    CorrelatorSeries,
    LgCurve,
    SPIN_UNITS,
    SpectrumRecord,
)
from .detector_pipeline import LineResponse, RecordBatch
from .qubit_dynamics import SpinTrajectory


def _provenance_header(meta):
    safe = {}
    for key, value in (meta or {}).items():
        if isinstance(value, (int, float, str, bool, type(None))):
            safe[key] = value
        elif isinstance(value, np.generic):
            safe[key] = value.item()
        else:
            safe[key] = repr(value)
    return "# provenance: " + json.dumps(safe, sort_keys=True)


def _write_table(path, header_cols, columns, meta):
    path = Path(path)
    data = np.column_stack(columns)
    with path.open("w") as fh:
        fh.write(_provenance_header(meta) + "\n")
        fh.write(",".join(header_cols) + "\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.12g")
    return path


def read_provenance(path):
    with Path(path).open() as fh:
        first = fh.readline()
    if first.startswith("# provenance: "):
        return json.loads(first[len("# provenance: "):])
    return {}


def write_spectrum_csv(path, spec, extra_meta=None):
    meta = dict(spec.meta)
    meta.update(extra_meta or {})
    meta.update({"units": spec.units, "one_sided": spec.one_sided})
    return _write_table(path, ["freq_Hz", "density"],
                        [spec.freqs / (2.0 * np.pi), spec.density], meta)


def read_spectrum_csv(path, units=SPIN_UNITS):
    meta = read_provenance(path)
    data = np.loadtxt(path, delimiter=",", skiprows=2)
    return SpectrumRecord(
        2.0 * np.pi * data[:, 0], data[:, 1],
        units=meta.get("units", units),
        one_sided=bool(meta.get("one_sided", True)),
        meta=meta,
    )


def write_correlator_csv(path, corr, extra_meta=None):
    meta = dict(corr.meta)
    meta.update(extra_meta or {})
    return _write_table(path, ["tau_ns", "K"],
                        [corr.taus * 1e9, corr.values], meta)


def write_lg_csv(path, curve, extra_meta=None):
    meta = dict(curve.meta)
    meta.update(extra_meta or {})
    return _write_table(
        path,
        ["tau_ns", "f", "sigma", "sys_lo", "sys_hi"],
        [curve.taus * 1e9, curve.f, curve.sigma_stat, curve.sys_lo, curve.sys_hi],
        meta,
    )


def read_lg_csv(path):
    meta = read_provenance(path)
    data = np.loadtxt(path, delimiter=",", skiprows=2)
    return LgCurve(data[:, 0] * 1e-9, data[:, 1], data[:, 2], data[:, 3],
                   data[:, 4], meta=meta)


def write_trajectory_csv(path, traj, extra_meta=None):
    return _write_table(
        path,
        ["t_s", "x", "y", "z"],
        [traj.times, traj.xyz[:, 0], traj.xyz[:, 1], traj.xyz[:, 2]],
        extra_meta or {},
    )


def read_trajectory_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=2)
    return SpinTrajectory(data[:, 0], data[:, 1:4])


def write_line_response_csv(path, line):
    return _write_table(
        path,
        ["freq_Hz", "R", "dR_over_R"],
        [line.freqs / (2.0 * np.pi), line.R,
         np.full(line.freqs.size, line.dR_over_R)],
        {},
    )


def read_line_response_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    return LineResponse(2.0 * np.pi * data[:, 0], data[:, 1],
                        float(data[0, 2]) if data.shape[1] > 2 else 0.0)


def write_records(path_base, batches, dt):
    """Write a record stream as interleaved I/Q float64 plus a JSON sidecar.

    Layout: records in stream order; each record is record_len I samples
    followed by record_len Q samples.  The sidecar lists dt, record_len, and
    the per-record tags."""
    path_base = Path(path_base)
    bin_path = path_base.with_suffix(".iq")
    tags = []
    record_len = None
    with bin_path.open("wb") as fh:
        for batch in batches:
            record_len = batch.I.shape[1]
            interleaved = np.concatenate([batch.I, batch.Q], axis=1)
            interleaved.astype("<f8").tofile(fh)
            tags.extend([batch.tag] * batch.I.shape[0])
    sidecar = {
        "dt": dt,
        "record_len": record_len,
        "n_records": len(tags),
        "tags": tags,
        "layout": "per record: record_len I float64 then record_len Q float64",
    }
    json_path = path_base.with_suffix(".json")
    json_path.write_text(json.dumps(sidecar, indent=1))
    return bin_path, json_path


def read_records(path_base, batch_size=256):
    """Yield RecordBatch objects from a written record file."""
    path_base = Path(path_base)
    sidecar = json.loads(path_base.with_suffix(".json").read_text())
    n = sidecar["record_len"]
    tags = sidecar["tags"]
    raw = np.fromfile(path_base.with_suffix(".iq"), dtype="<f8")
    raw = raw.reshape(len(tags), 2 * n)
    i = 0
    while i < len(tags):
        j = i
        while j < len(tags) and tags[j] == tags[i] and j - i < batch_size:
            j += 1
        chunk = raw[i:j]
        yield RecordBatch(chunk[:, :n], chunk[:, n:], tags[i])
        i = j


def write_json_summary(path, payload):
    """JSON twin for any analysis product (full parameter provenance)."""
    def default(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.generic):
            return obj.item()
        return repr(obj)

    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True,
                                     default=default))
    return Path(path)
