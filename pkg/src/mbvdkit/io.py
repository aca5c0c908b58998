"""File interchange: Touchstone v1, admittance CSV and JSON configs/results.

Touchstone two-port rows follow the v1 column order ``f S11 S21 S12 S22``.
Every parser reports failures as :class:`ParseError` carrying the line number
(text formats) or the offending key path (JSON).
"""

import csv
import io as _io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError, MbvdError, ParseError
from .ladder import PLACEMENTS, FilterMetrics, LadderDesign
from .mbvd import MbvdParams, ResonatorSpec, mbvd_from_spec
from .network import FrequencySweep, renormalize_sweep

FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
_UNIT_NAMES = {"HZ": "Hz", "KHZ": "kHz", "MHZ": "MHz", "GHZ": "GHz"}
FORMATS = ("RI", "MA", "DB")

# Values per data row: frequency plus two numbers per parameter.
_ROW_WIDTH = {1: 3, 2: 9}
# Column order of a two-port row, as (row, col) matrix indices.
_S2P_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class TouchstoneHeader:
    """Contents of the ``#`` option line."""

    freq_unit: str = "GHz"
    param: str = "S"
    format: str = "RI"
    reference: float = 50.0

    def __post_init__(self):
        unit = str(self.freq_unit).upper()
        if unit not in FREQ_UNITS:
            raise InputError(f"unknown frequency unit {self.freq_unit!r}")
        fmt = str(self.format).upper()
        if fmt not in FORMATS:
            raise InputError(f"unknown data format {self.format!r}")
        if str(self.param).upper() != "S":
            raise InputError("only S-parameter Touchstone data is supported")
        ref = float(self.reference)
        if not (math.isfinite(ref) and ref > 0):
            raise InputError(f"reference impedance must be > 0, got {self.reference!r}")
        object.__setattr__(self, "freq_unit", _UNIT_NAMES[unit])
        object.__setattr__(self, "format", fmt)
        object.__setattr__(self, "param", "S")
        object.__setattr__(self, "reference", ref)

    @property
    def scale(self):
        return FREQ_UNITS[self.freq_unit.upper()]


# --- format conversions ----------------------------------------------------


def ri_to_ma(z):
    """Complex values to (magnitude, angle in degrees)."""
    z = np.asarray(z, dtype=complex)
    return np.abs(z), np.degrees(np.angle(z))


def ma_to_ri(mag, ang_deg):
    return np.asarray(mag, dtype=float) * np.exp(1j * np.radians(ang_deg))


def ri_to_db(z):
    """Complex values to (20 log10 magnitude, angle in degrees)."""
    mag, ang = ri_to_ma(z)
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(mag), ang


def db_to_ri(db, ang_deg):
    return ma_to_ri(10.0 ** (np.asarray(db, dtype=float) / 20.0), ang_deg)


def to_pairs(z, fmt):
    """Split complex values into the two numbers of Touchstone format ``fmt``."""
    fmt = fmt.upper()
    z = np.asarray(z, dtype=complex)
    if fmt == "RI":
        return z.real, z.imag
    if fmt == "MA":
        return ri_to_ma(z)
    if fmt == "DB":
        return ri_to_db(z)
    raise InputError(f"unknown data format {fmt!r}")


def from_pairs(a, b, fmt):
    """Inverse of :func:`to_pairs`."""
    fmt = fmt.upper()
    if fmt == "RI":
        return np.asarray(a, dtype=float) + 1j * np.asarray(b, dtype=float)
    if fmt == "MA":
        return ma_to_ri(a, b)
    if fmt == "DB":
        return db_to_ri(a, b)
    raise InputError(f"unknown data format {fmt!r}")


# --- Touchstone -------------------------------------------------------------


def _as_text(data):
    if isinstance(data, (bytes, bytearray)):
        try:
            return bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8 text ({exc.reason})") from None
    if not isinstance(data, str):
        raise ParseError(f"expected text, got {type(data).__name__}")
    return data


def _parse_option_line(tokens, lineno):
    unit, param, fmt, ref = "GHZ", "S", "MA", 50.0
    seen = set()
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in FREQ_UNITS:
            kind, unit = "unit", tok
        elif tok in ("S", "Y", "Z", "H", "G"):
            kind, param = "param", tok
        elif tok in FORMATS:
            kind, fmt = "format", tok
        elif tok == "R":
            kind = "reference"
            if i + 1 >= len(tokens):
                raise ParseError("option 'R' needs a reference impedance", line=lineno)
            try:
                ref = float(tokens[i + 1])
            except ValueError:
                raise ParseError(
                    f"bad reference impedance {tokens[i + 1]!r}", line=lineno
                ) from None
            if not (math.isfinite(ref) and ref > 0):
                raise ParseError("reference impedance must be finite and > 0", line=lineno)
            i += 1
        else:
            raise ParseError(f"unknown option {tokens[i]!r}", line=lineno)
        if kind in seen:
            raise ParseError(f"option line sets the {kind} twice", line=lineno)
        seen.add(kind)
        i += 1
    if param != "S":
        raise ParseError(f"only S parameters are supported, got {param}", line=lineno)
    return TouchstoneHeader(_UNIT_NAMES[unit], "S", fmt, ref)


def read_touchstone(data, nports=None):
    """Parse Touchstone v1 text (``str`` or ``bytes``) into ``(header, sweep)``.

    ``nports`` (1 or 2) is taken from the column count when omitted; an
    input without data rows gives an empty two-port sweep unless ``nports``
    says otherwise. A missing option line means ``# GHz S MA R 50``.
    """
    text = _as_text(data)
    if nports not in (None, 1, 2):
        raise InputError("nports must be 1 or 2")
    header = None
    freqs, rows = [], []
    prev_f = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if header is not None:
                raise ParseError("second option line", line=lineno)
            if rows:
                raise ParseError("option line must precede the data", line=lineno)
            header = _parse_option_line(line[1:].split(), lineno)
            continue
        if line.startswith("["):
            raise ParseError("Touchstone v2 keywords are not supported", line=lineno)
        if header is None:
            header = TouchstoneHeader("GHz", "S", "MA", 50.0)
        try:
            values = [float(t) for t in line.split()]
        except ValueError:
            raise ParseError(f"non-numeric data in {line[:40]!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise ParseError("non-finite number in data row", line=lineno)
        if nports is None:
            for n, width in _ROW_WIDTH.items():
                if len(values) == width:
                    nports = n
                    break
            else:
                raise ParseError(
                    f"{len(values)} columns; expected 3 (one-port) or 9 (two-port)",
                    line=lineno,
                )
        width = _ROW_WIDTH[nports]
        f = values[0] * header.scale
        if prev_f is not None and f <= prev_f:
            if nports == 2 and len(values) == 5:
                raise ParseError(
                    "noise parameter data is not supported; remove the noise section",
                    line=lineno,
                )
            raise ParseError("frequencies must be strictly increasing", line=lineno)
        if len(values) != width:
            raise ParseError(f"{len(values)} columns, expected {width}", line=lineno)
        if not (math.isfinite(f) and f > 0):
            raise ParseError("frequency must be finite and > 0 Hz", line=lineno)
        prev_f = f
        freqs.append(f)
        rows.append(values[1:])
    if header is None:
        header = TouchstoneHeader("GHz", "S", "MA", 50.0)
    nports = 2 if nports is None else nports
    arr = np.asarray(rows, dtype=float).reshape(len(rows), 2 * nports * nports)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = from_pairs(arr[:, 0::2], arr[:, 1::2], header.format)
    if not np.all(np.isfinite(vals)):
        bad = int(np.nonzero(~np.all(np.isfinite(vals), axis=1))[0][0])
        raise ParseError(f"data row {bad + 1} overflows when converted to complex")
    s = np.empty((len(rows), nports, nports), dtype=complex)
    if nports == 1:
        s[:, 0, 0] = vals[:, 0]
    else:
        for k, (i, j) in enumerate(_S2P_ORDER):
            s[:, i, j] = vals[:, k]
    sweep = FrequencySweep(np.asarray(freqs), s, "s", (header.reference,) * nports)
    return header, sweep


def write_touchstone(header, sweep):
    """Touchstone v1 text for an S sweep.

    Values are printed with 12 significant digits in the header's format.
    A sweep with a different reference is renormalized to
    ``header.reference`` first. Flagged points are left out and counted in
    a comment.
    """
    header = TouchstoneHeader() if header is None else header
    if sweep.kind != "s":
        raise InputError("write_touchstone needs S-parameter data")
    n = sweep.nports
    ref = (complex(header.reference),) * n
    if len(sweep) and tuple(sweep.reference[:n]) != ref:
        sweep = renormalize_sweep(sweep, *ref)
    out = _io.StringIO()
    out.write(f"# {header.freq_unit} S {header.format} R {header.reference:.17g}\n")
    nflag = int(np.count_nonzero(sweep.flagged))
    if nflag:
        out.write(f"! {nflag} singular points omitted\n")
    order = ((0, 0),) if n == 1 else _S2P_ORDER
    scale = header.scale
    for k in np.nonzero(~sweep.flagged)[0]:
        fields = [repr(float(sweep.freqs[k] / scale))]
        for i, j in order:
            a, b = to_pairs(sweep.data[k, i, j], header.format)
            if header.format == "DB" and not np.isfinite(a):
                a = -6000.0
            fields.append("%.11e %.11e" % (a, b))
        out.write(" ".join(fields) + "\n")
    return out.getvalue()


def s1p_to_admittance(sweep):
    """Admittance ``(1/z0)(1 - S11)/(1 + S11)`` of a one-port sweep."""
    if sweep.kind != "s" or sweep.nports != 1:
        raise InputError("expected a one-port S sweep")
    z0 = sweep.reference[0]
    s11 = sweep.data[:, 0, 0]
    if np.any(s11 == -1):
        raise InputError("S11 = -1 (short circuit): admittance is unbounded")
    return (1.0 - s11) / (1.0 + s11) / z0


# --- admittance CSV -----------------------------------------------------------

CSV_COLUMNS = ("freq_hz", "y_mag_s", "y_mag_db", "y_phase_deg", "y_re", "y_im")


def read_admittance_csv(data):
    """Parse a CSV with a header row into ``(freqs, y)``.

    Columns come from :data:`CSV_COLUMNS`. ``freq_hz`` is required, plus
    either ``y_re``/``y_im`` or a magnitude (``y_mag_s`` or ``y_mag_db``,
    the latter meaning ``20 log10(|Y| / 1 S)``) with ``y_phase_deg``.
    When several forms are present the rectangular one is used.
    """
    text = _as_text(data)
    try:
        rows = list(csv.reader(_io.StringIO(text)))
    except csv.Error as exc:
        raise ParseError(f"malformed CSV: {exc}") from None
    numbered = [(i + 1, r) for i, r in enumerate(rows) if any(c.strip() for c in r)]
    if not numbered:
        raise ParseError("missing header row", line=1)
    hline, head = numbered[0]
    cols = [c.strip().lower() for c in head]
    for c in cols:
        if c not in CSV_COLUMNS:
            raise ParseError(f"unknown column {c!r}", line=hline, field=c)
    if len(set(cols)) != len(cols):
        raise ParseError("duplicate column", line=hline)
    have = set(cols)
    if "freq_hz" not in have:
        raise ParseError("freq_hz column is required", line=hline, field="freq_hz")
    if ("y_re" in have) != ("y_im" in have):
        missing = "y_im" if "y_re" in have else "y_re"
        raise ParseError("y_re and y_im must appear together", line=hline, field=missing)
    has_mag = bool(have & {"y_mag_s", "y_mag_db"})
    if has_mag != ("y_phase_deg" in have):
        missing = "y_phase_deg" if has_mag else "y_mag_s"
        raise ParseError(
            "a magnitude column needs y_phase_deg and vice versa", line=hline, field=missing
        )
    if "y_re" not in have and not has_mag:
        raise ParseError("no admittance columns", line=hline)

    idx = {c: k for k, c in enumerate(cols)}
    table = []
    for lineno, r in numbered[1:]:
        if len(r) != len(cols):
            raise ParseError(f"{len(r)} fields, expected {len(cols)}", line=lineno)
        try:
            vals = [float(c) for c in r]
        except ValueError:
            raise ParseError("non-numeric field", line=lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite value", line=lineno)
        if table and vals[idx["freq_hz"]] <= table[-1][1][idx["freq_hz"]]:
            raise ParseError("frequencies must be strictly increasing", line=lineno)
        if not vals[idx["freq_hz"]] > 0:
            raise ParseError("frequency must be > 0", line=lineno, field="freq_hz")
        table.append((lineno, vals))
    arr = np.array([v for _, v in table], dtype=float).reshape(len(table), len(cols))
    freqs = arr[:, idx["freq_hz"]]
    if "y_re" in have:
        y = arr[:, idx["y_re"]] + 1j * arr[:, idx["y_im"]]
    else:
        if "y_mag_s" in have:
            mag = arr[:, idx["y_mag_s"]]
        else:
            with np.errstate(over="ignore"):
                mag = 10.0 ** (arr[:, idx["y_mag_db"]] / 20.0)
        y = ma_to_ri(mag, arr[:, idx["y_phase_deg"]])
    if not np.all(np.isfinite(y)):
        k = int(np.nonzero(~np.isfinite(y))[0][0])
        raise ParseError("admittance overflows", line=table[k][0])
    return freqs, y


def write_admittance_csv(freqs, y, form="ri"):
    """CSV text for an admittance sweep; ``form`` is "ri", "ma" or "db".

    Numbers are written with 17 significant digits so reading them back is
    exact for the rectangular form.
    """
    freqs = np.asarray(freqs, dtype=float)
    y = np.asarray(y, dtype=complex)
    form = form.lower()
    if form == "ri":
        head, cols = ("freq_hz", "y_re", "y_im"), (y.real, y.imag)
    elif form == "ma":
        mag, ang = ri_to_ma(y)
        head, cols = ("freq_hz", "y_mag_s", "y_phase_deg"), (mag, ang)
    elif form == "db":
        db, ang = ri_to_db(y)
        head, cols = ("freq_hz", "y_mag_db", "y_phase_deg"), (db, ang)
    else:
        raise InputError(f"unknown CSV form {form!r}")
    lines = [",".join(head)]
    for k in range(freqs.size):
        lines.append(",".join("%.17g" % v for v in (freqs[k],) + tuple(c[k] for c in cols)))
    return "\n".join(lines) + "\n"


def read_sweep_file(path):
    """Load an admittance sweep from ``.csv`` or ``.s1p``; returns ``(freqs, y)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if str(path).lower().endswith(".s1p"):
        _, sweep = read_touchstone(raw, nports=1)
        return sweep.freqs, s1p_to_admittance(sweep)
    return read_admittance_csv(raw)


# --- JSON design configs ------------------------------------------------------

SPEC_KEYS = {"fs_hz": "fs", "k2": "k2", "q": "q", "c0_f": "c0", "rs_ohm": "rs", "ls_h": "ls"}
PARAM_KEYS = {
    "c0_f": "c0",
    "rm_ohm": "rm",
    "lm_h": "lm",
    "cm_f": "cm",
    "rs_ohm": "rs",
    "ls_h": "ls",
}
OPTIMIZER_KEYS = {
    "target_band_hz": list,
    "min_rejection_db": (float, type(None)),
    "guard_fraction": float,
    "penalty": float,
    "starts_per_axis": int,
    "max_iter": int,
    "tol": float,
}
FIT_KEYS = {
    "max_iter": int,
    "restarts": int,
    "tol": float,
    "weights": list,
    "fit_parasitics": bool,
    "seed": int,
}
_OPTIONAL_ZERO = ("rs_ohm", "ls_h")
MAX_GRID_POINTS = 10_000_000


@dataclass(frozen=True)
class DesignConfig:
    """A ladder design with its simulation grid and tool options.

    ``specs`` keeps, per stage, the :class:`ResonatorSpec` it was given as
    (``None`` for stages given as element values), so writing the config
    back reproduces the input.
    """

    design: LadderDesign
    grid: dict
    specs: tuple = ()
    optimizer: dict = field(default_factory=dict)
    fit: dict = field(default_factory=dict)

    @property
    def freqs(self):
        g = self.grid
        if g.get("spacing", "linear") == "log":
            return np.geomspace(g["start_hz"], g["stop_hz"], g["points"])
        return np.linspace(g["start_hz"], g["stop_hz"], g["points"])

    @property
    def template(self):
        """``(placement, ResonatorSpec)`` pairs, as :func:`optimize_static_caps` wants."""
        if any(s is None for s in self.specs):
            raise InputError("every stage needs a 'spec' block for synthesis")
        return [(pl, sp) for (pl, _), sp in zip(self.design.stages, self.specs)]


def _number(value, path, kind=float):
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError("expected an integer", field=path)
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ParseError("expected true or false", field=path)
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError("expected a number", field=path)
    try:
        value = float(value)
    except OverflowError:
        raise ParseError("number out of range", field=path) from None
    if not math.isfinite(value):
        raise ParseError("expected a finite number", field=path)
    return value


def _object(value, path):
    if not isinstance(value, dict):
        raise ParseError("expected an object", field=path)
    return value


def _known(obj, allowed, path):
    for key in obj:
        if key not in allowed:
            raise ParseError("unknown key", field=f"{path}.{key}")


def _port(obj, path):
    obj = _object(obj, path)
    _known(obj, ("r_ohm", "x_ohm"), path)
    if "r_ohm" not in obj:
        raise ParseError("missing key", field=f"{path}.r_ohm")
    r = _number(obj["r_ohm"], f"{path}.r_ohm")
    x = _number(obj.get("x_ohm", 0.0), f"{path}.x_ohm")
    if not r > 0:
        raise ParseError("port resistance must be > 0", field=f"{path}.r_ohm")
    return complex(r, x)


def _element_block(obj, keys, path):
    obj = _object(obj, path)
    _known(obj, keys, path)
    out = {}
    for key, attr in keys.items():
        if key not in obj:
            if key in _OPTIONAL_ZERO:
                continue
            raise ParseError("missing key", field=f"{path}.{key}")
        out[attr] = _number(obj[key], f"{path}.{key}")
    return out


def _options(obj, schema, path):
    obj = _object(obj, path)
    _known(obj, schema, path)
    out = {}
    for key, kind in schema.items():
        if key not in obj:
            continue
        value = obj[key]
        sub = f"{path}.{key}"
        if kind is list:
            if not isinstance(value, list) or len(value) != 2:
                raise ParseError("expected a list of two numbers", field=sub)
            value = [_number(v, f"{sub}[{i}]") for i, v in enumerate(value)]
        elif kind == (float, type(None)):
            value = None if value is None else _number(value, sub)
        else:
            value = _number(value, sub, kind)
        out[key] = value
    return out


def config_from_dict(raw):
    """Validate a decoded JSON object and build a :class:`DesignConfig`."""
    raw = _object(raw, "$")
    _known(raw, ("ports", "grid", "stages", "optimizer", "fit"), "$")
    for key in ("grid", "stages"):
        if key not in raw:
            raise ParseError("missing key", field=key)

    ports = _object(raw.get("ports", {}), "ports")
    _known(ports, ("port1", "port2"), "ports")
    z1 = _port(ports["port1"], "ports.port1") if "port1" in ports else 50.0
    z2 = _port(ports["port2"], "ports.port2") if "port2" in ports else z1

    grid = _object(raw["grid"], "grid")
    _known(grid, ("start_hz", "stop_hz", "points", "spacing"), "grid")
    for key in ("start_hz", "stop_hz", "points"):
        if key not in grid:
            raise ParseError("missing key", field=f"grid.{key}")
    start = _number(grid["start_hz"], "grid.start_hz")
    stop = _number(grid["stop_hz"], "grid.stop_hz")
    points = _number(grid["points"], "grid.points", int)
    spacing = grid.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ParseError("spacing must be 'linear' or 'log'", field="grid.spacing")
    if not start > 0:
        raise ParseError("must be > 0", field="grid.start_hz")
    if not stop > start:
        raise ParseError("must exceed grid.start_hz", field="grid.stop_hz")
    if not 2 <= points <= MAX_GRID_POINTS:
        raise ParseError(f"need 2 to {MAX_GRID_POINTS} points", field="grid.points")
    grid_out = {"start_hz": start, "stop_hz": stop, "points": points}
    if "spacing" in grid:
        grid_out["spacing"] = spacing

    stages_raw = raw["stages"]
    if not isinstance(stages_raw, list) or not stages_raw:
        raise ParseError("expected a non-empty list", field="stages")
    stages, specs = [], []
    for k, st in enumerate(stages_raw):
        path = f"stages[{k}]"
        st = _object(st, path)
        _known(st, ("placement", "spec", "params"), path)
        placement = st.get("placement")
        if placement not in PLACEMENTS:
            raise ParseError("must be 'shunt' or 'series'", field=f"{path}.placement")
        if ("spec" in st) == ("params" in st):
            raise ParseError("give exactly one of 'spec' or 'params'", field=path)
        try:
            if "spec" in st:
                spec = ResonatorSpec(**_element_block(st["spec"], SPEC_KEYS, f"{path}.spec"))
                params = mbvd_from_spec(spec)
            else:
                spec = None
                params = MbvdParams(**_element_block(st["params"], PARAM_KEYS, f"{path}.params"))
        except InputError as exc:
            raise ParseError(str(exc), field=path) from None
        stages.append((placement, params))
        specs.append(spec)

    optimizer = _options(raw.get("optimizer", {}), OPTIMIZER_KEYS, "optimizer")
    fit = _options(raw.get("fit", {}), FIT_KEYS, "fit")
    design = LadderDesign(tuple(stages), (z1, z2))
    return DesignConfig(design, grid_out, tuple(specs), optimizer, fit)


def _port_dict(z):
    z = complex(z)
    return {"r_ohm": z.real, "x_ohm": z.imag}


def params_to_dict(p):
    return {key: getattr(p, attr) for key, attr in PARAM_KEYS.items()}


def spec_to_dict(spec):
    return {key: getattr(spec, attr) for key, attr in SPEC_KEYS.items()}


def config_to_dict(cfg):
    stages = []
    specs = cfg.specs or (None,) * len(cfg.design.stages)
    for (placement, params), spec in zip(cfg.design.stages, specs):
        if spec is not None:
            stages.append({"placement": placement, "spec": spec_to_dict(spec)})
        else:
            stages.append({"placement": placement, "params": params_to_dict(params)})
    out = {
        "ports": {
            "port1": _port_dict(cfg.design.port_z[0]),
            "port2": _port_dict(cfg.design.port_z[1]),
        },
        "grid": dict(cfg.grid),
        "stages": stages,
    }
    if cfg.optimizer:
        out["optimizer"] = dict(cfg.optimizer)
    if cfg.fit:
        out["fit"] = dict(cfg.fit)
    return out


def _loads(data):
    text = _as_text(data)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    except RecursionError:
        raise ParseError("JSON nesting too deep") from None


def read_design_config(data):
    """Parse design-config JSON text into a :class:`DesignConfig`."""
    return config_from_dict(_loads(data))


def write_design_config(cfg):
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


# --- result JSON -------------------------------------------------------------


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


def filter_metrics_to_dict(m):
    if m is None:
        return None
    return {
        "f_center_hz": m.f_center,
        "il_db": m.il_db,
        "fbw_3db_pct": m.fbw_3db,
        "oob_rejection_db": m.oob_rejection_db,
        "band_lo_hz": m.band_lo,
        "band_hi_hz": m.band_hi,
    }


def filter_metrics_from_dict(d):
    d = _object(d, "$")
    keys = ("f_center_hz", "il_db", "fbw_3db_pct", "oob_rejection_db", "band_lo_hz", "band_hi_hz")
    _known(d, keys, "$")
    for k in keys:
        if k not in d:
            raise ParseError("missing key", field=k)
    return FilterMetrics(*(_number(d[k], k) for k in keys))


def resonator_metrics_to_dict(m):
    """Resonator figures; an infinite Q (lossless branch) is written as null."""
    if m is None:
        return None
    return {
        "fs_eff_hz": m.fs_eff,
        "fp_eff_hz": m.fp_eff,
        "k2": m.k2,
        "q": _finite_or_none(m.q),
        "fom": _finite_or_none(m.fom),
        "f_em_hz": m.f_em,
    }


def fit_result_to_dict(result):
    return {
        "params": params_to_dict(result.params),
        "metrics": resonator_metrics_to_dict(result.metrics),
        "residual": result.residual,
        "converged": result.converged,
        "seed": result.seed,
    }


def params_from_dict(d, path="params"):
    try:
        return MbvdParams(**_element_block(d, PARAM_KEYS, path))
    except InputError as exc:
        raise ParseError(str(exc), field=path) from None


def read_json(data):
    """Decode JSON text with :class:`ParseError` on failure."""
    return _loads(data)


def dumps(obj):
    """Pretty JSON with a trailing newline; NaN/inf are not allowed."""
    try:
        return json.dumps(obj, indent=2, allow_nan=False) + "\n"
    except ValueError as exc:
        raise MbvdError(f"result contains a non-finite number: {exc}") from None
