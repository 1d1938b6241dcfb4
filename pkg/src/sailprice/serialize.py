"""Flat ``name=value`` text encoding shared by the model file formats."""

from .core_data import ColumnKind, ColumnSpec, FeatureSchema, StandardizationParams
from .errors import SchemaMismatch


def fmt_float(value):
    """17 significant digits: enough for an exact binary64 round trip."""
    return format(float(value), ".17g")


def dump_schema(schema):
    lines = [f"columns={len(schema.columns)}"]
    for i, c in enumerate(schema.columns):
        levels = ";".join(c.group_levels or ())
        lines.append(f"column.{i}={c.name}|{c.kind.value}|{levels}|{c.dropped_level or ''}")
    return lines


def dump_standardization(params):
    if params is None:
        return ["standardized=0"]
    lines = ["standardized=1"]
    for name, m, s in zip(params.columns, params.means, params.scales):
        lines.append(f"std.mean.{name}={fmt_float(m)}")
        lines.append(f"std.scale.{name}={fmt_float(s)}")
    return lines


def parse_pairs(lines):
    pairs = {}
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SchemaMismatch(f"malformed line: {raw!r}")
        pairs[key.strip()] = value.strip()
    return pairs


def load_schema(pairs):
    specs = []
    for i in range(int(pairs["columns"])):
        name, kind, levels, dropped = pairs[f"column.{i}"].split("|")
        kind = ColumnKind(kind)
        if kind is ColumnKind.NUMERIC:
            specs.append(ColumnSpec(name))
        else:
            specs.append(ColumnSpec(name, kind, tuple(levels.split(";")), dropped or None))
    return FeatureSchema(tuple(specs))


def load_standardization(pairs, schema):
    if pairs.get("standardized", "0") != "1":
        return None
    cols = tuple(n for n in schema.numeric_names() if f"std.mean.{n}" in pairs)
    return StandardizationParams(
        cols,
        tuple(float(pairs[f"std.mean.{n}"]) for n in cols),
        tuple(float(pairs[f"std.scale.{n}"]) for n in cols),
    )
