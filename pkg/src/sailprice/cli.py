"""``sailprice`` command line: clean, synth, fit, compare, report.

Settings come from an optional flat ``key=value`` file (``--config``) and
are overridden by flags. All randomness derives from ``--seed``: the split
uses seed+1, synthetic data seed+2, counterfactual sampling seed+3.

Exit codes: 0 success, 1 I/O, 2 empty or degenerate data, 64 usage,
70 numerical failure.
"""

import argparse
from dataclasses import dataclass, field
import logging
from pathlib import Path
import sys
from typing import Optional

from .core_data import RegionScheme
from .errors import SailpriceError, UsageError, IoError
from .evaluation import (
    FAMILIES,
    ModelSpec,
    compare_models,
    fit_model,
    make_split,
    run_swap,
    swap_csv,
    table_csv,
    table_markdown,
)
from .gradient_boosting import dumps_ensemble
from .ingest import SyntheticSpec, generate_synthetic, load_csv, realistic_spec, write_csv
from .linear_model import dumps_linear_model
from .metrics import EvalReport
from .report import build_report, residual_figure
from .serialize import fmt_float, parse_pairs

log = logging.getLogger("sailprice")

DEFAULT_SEED = 42
REGION_CHOICES = {"none": None, "three": RegionScheme.THREE_REGION,
                  "four": RegionScheme.FOUR_REGION_HK}
SWAP_LIMIT = 0.10


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(UsageError.exit_code, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    input_csv: Optional[Path] = None
    output_dir: Path = Path("out")
    output: Optional[Path] = None
    seed: int = DEFAULT_SEED
    models: list = field(default_factory=list)
    regions: Optional[str] = None
    standardize: Optional[bool] = None
    sample_size: int = 3000
    spec_file: Optional[Path] = None
    params: dict = field(default_factory=dict)  # family -> {name: value}

    def region_scheme(self):
        if self.regions is None:
            return None
        if self.regions not in REGION_CHOICES:
            raise UsageError(f"unknown region scheme {self.regions!r}; use three or four")
        return REGION_CHOICES[self.regions]

    def spec_for(self, family):
        if family not in FAMILIES:
            raise UsageError(f"unknown model family {family!r}; expected one of {', '.join(FAMILIES)}")
        return ModelSpec(family, dict(self.params.get(family, {})),
                         region_scheme=self.region_scheme(), standardize=self.standardize)


def _bool(value):
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {value!r}")


def _read_pairs(path):
    path = Path(path)
    if not path.is_file():
        raise IoError(f"config file not found: {path}")
    return parse_pairs(path.read_text(encoding="utf-8").splitlines())


def load_config(args):
    cfg = RunConfig()
    if args.config:
        for key, value in _read_pairs(args.config).items():
            family, dot, name = key.partition(".")
            if dot and family in FAMILIES:
                cfg.params.setdefault(family, {})[name] = value
            elif key == "input":
                cfg.input_csv = Path(value)
            elif key == "output_dir":
                cfg.output_dir = Path(value)
            elif key == "output":
                cfg.output = Path(value)
            elif key == "seed":
                cfg.seed = int(value)
            elif key in ("model", "models"):
                cfg.models = [m.strip() for m in value.split(",") if m.strip()]
                if not cfg.models:
                    raise UsageError(f"config key {key!r} lists no models")
            elif key == "regions":
                cfg.regions = value or None
            elif key == "standardize":
                cfg.standardize = _bool(value)
            elif key == "sample_size":
                cfg.sample_size = int(value)
            elif key == "spec":
                cfg.spec_file = Path(value)
            else:
                raise UsageError(f"unknown config key {key!r}")
    if getattr(args, "input", None):
        cfg.input_csv = Path(args.input)
    if getattr(args, "output_dir", None):
        cfg.output_dir = Path(args.output_dir)
    if getattr(args, "output", None):
        cfg.output = Path(args.output)
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "model", None):
        cfg.models = list(args.model)
    if getattr(args, "regions", None):
        cfg.regions = None if args.regions == "none" else args.regions
    if getattr(args, "standardize", None) is not None:
        cfg.standardize = args.standardize
    if getattr(args, "sample_size", None) is not None:
        cfg.sample_size = args.sample_size
    if getattr(args, "spec", None):
        cfg.spec_file = Path(args.spec)
    if cfg.seed < 0:
        raise UsageError("seed must be non-negative")
    return cfg


def _require_input(cfg):
    if cfg.input_csv is None:
        raise UsageError("no input CSV given (--input or input= in the config file)")
    return load_csv(cfg.input_csv)


def cmd_clean(cfg):
    records, report = _require_input(cfg)
    out = cfg.output or cfg.output_dir / "cleaned.csv"
    write_csv(records, out)
    for line in report.lines():
        print(line)
    print(f"wrote {out}")
    return 0


_REGION_KEYS = {"caribbean": "Caribbean", "europe": "Europe", "usa": "USA",
                "hong_kong": "HongKong", "hongkong": "HongKong"}


def synthetic_spec_from_pairs(pairs, default_seed):
    base = realistic_spec(2000, default_seed)
    if pairs.get("preset", "realistic") == "none":
        base = SyntheticSpec(n_rows=2000, seed=default_seed)
    coefs = dict(base.true_coefficients)
    regions = {}
    for key, value in pairs.items():
        if key.startswith("coef."):
            coefs[key[5:]] = float(value)
        elif key.startswith("region."):
            token = key[7:].lower()
            if token not in _REGION_KEYS:
                raise UsageError(f"unknown region in {key!r}")
            regions[_REGION_KEYS[token]] = float(value)
    step = None
    if pairs.get("step"):
        col, thr, amount = pairs["step"].split(",")
        step = (col.strip(), float(thr), float(amount))
    known = {"preset", "n_rows", "seed", "noise_std", "noise_pct", "intercept", "step",
             "catamaran_fraction"}
    unknown = [k for k in pairs if k not in known and not k.startswith(("coef.", "region."))]
    if unknown:
        raise UsageError(f"unknown synthetic spec keys: {', '.join(sorted(unknown))}")
    try:
        spec = SyntheticSpec(
            n_rows=int(pairs.get("n_rows", base.n_rows)),
            true_coefficients=coefs,
            true_intercept=float(pairs.get("intercept", base.true_intercept)),
            region_effects=regions,
            noise_std=float(pairs.get("noise_std", 0.0)),
            seed=int(pairs.get("seed", default_seed)),
            step_effect=step,
            catamaran_fraction=float(pairs.get("catamaran_fraction", base.catamaran_fraction)),
        )
    except ValueError as exc:
        raise UsageError(f"invalid synthetic spec: {exc}") from None
    if pairs.get("noise_pct"):
        # noise as a percentage of the mean noise-free price
        clean = generate_synthetic(spec)
        mean_price = sum(r.listing_price for r in clean) / len(clean)
        spec.noise_std = float(pairs["noise_pct"]) / 100.0 * mean_price
    return spec


def cmd_synth(cfg):
    pairs = _read_pairs(cfg.spec_file) if cfg.spec_file else {}
    spec = synthetic_spec_from_pairs(pairs, cfg.seed + 2)
    records = generate_synthetic(spec)
    out = cfg.output or cfg.output_dir / "synthetic.csv"
    write_csv(records, out)
    print(f"wrote {len(records)} rows to {out} (seed {spec.seed}, noise_std {spec.noise_std:g})")
    return 0


def _loss_trace_csv(losses):
    return "iteration,loss\n" + "".join(f"{i},{fmt_float(v)}\n" for i, v in enumerate(losses))


def cmd_fit(cfg):
    records, _ = _require_input(cfg)
    family = cfg.models[0] if cfg.models else "ols"
    if len(cfg.models) > 1:
        raise UsageError("fit takes exactly one --model; use compare for several")
    spec = cfg.spec_for(family)
    split = make_split([r.id for r in records], cfg.seed + 1)
    by_id = {r.id: r for r in records}
    train = [by_id[i] for i in split.half_a_ids]
    test = [by_id[i] for i in split.half_b_ids]
    fitted = fit_model(train, spec)
    _, y_train = fitted.design(train)
    _, y_test = fitted.design(test)
    pred_test = fitted.predict(test)
    reports = [
        EvalReport.from_predictions(family, "A (train)", y_train, fitted.predict(train)),
        EvalReport.from_predictions(family, "A->B", y_test, pred_test),
    ]
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    model_text = dumps_ensemble(fitted.model) if family == "gbr" else dumps_linear_model(fitted.model)
    paths = [out / f"model_{family}.txt", out / f"metrics_{family}.csv"]
    paths[0].write_text(model_text, encoding="utf-8")
    paths[1].write_text(table_csv(reports), encoding="utf-8")
    if fitted.losses is not None:
        trace = out / f"loss_trace_{family}.csv"
        trace.write_text(_loss_trace_csv(fitted.losses), encoding="utf-8")
        paths.append(trace)
    paths.append(residual_figure(reports[1], pred_test, out / f"residuals_{family}.svg",
                                 f"Residuals on the held-out half ({family})"))
    print(table_markdown(reports), end="")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_compare(cfg):
    records, _ = _require_input(cfg)
    families = cfg.models or list(FAMILIES)
    specs = [cfg.spec_for(f) for f in families]
    split = make_split([r.id for r in records], cfg.seed + 1)
    table = compare_models(records, specs, split)
    swaps = [run_swap(records, s, split) for s in specs]
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "comparison.csv").write_text(table_csv(table), encoding="utf-8")
    md = table_markdown(table) + "\n" + table_markdown(
        [r for s in swaps for r in (s.forward, s.backward)])
    (out / "comparison.md").write_text(md, encoding="utf-8")
    (out / "swap.csv").write_text(swap_csv(swaps, SWAP_LIMIT), encoding="utf-8")
    print(table_markdown(table), end="")
    for s in swaps:
        status = "ok" if s.within(SWAP_LIMIT) else "FLAG: swap gap above 10%"
        print(f"{s.forward.model_name}: relative MSE gap {s.relative_mse_gap:.4f}, "
              f"relative MAE gap {s.relative_mae_gap:.4f} [{status}]")
    return 0


def cmd_report(cfg):
    records, cleaning = _require_input(cfg)
    written = build_report(records, cfg.output_dir, seed=cfg.seed, regions=cfg.region_scheme(),
                           sample_size=cfg.sample_size, cleaning=cleaning)
    for p in written:
        print(f"wrote {p}")
    return 0


COMMANDS = {"clean": cmd_clean, "synth": cmd_synth, "fit": cmd_fit, "compare": cmd_compare,
            "report": cmd_report}


def build_parser():
    parser = _Parser(prog="sailprice", description="Sailboat listing price models and analyses.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value settings file; flags override it")
        p.add_argument("--seed", type=int, default=None, help=f"top-level seed (default {DEFAULT_SEED})")
        p.add_argument("--output-dir", help="directory for outputs (default ./out)")
        if name != "synth":
            p.add_argument("--input", help="listings CSV")
        if name in ("clean", "synth"):
            p.add_argument("--output", help="output CSV path")
        if name == "synth":
            p.add_argument("--spec", help="synthetic spec file (key=value)")
        if name in ("fit", "compare", "report"):
            p.add_argument("--regions", choices=sorted(REGION_CHOICES))
        if name in ("fit", "compare"):
            p.add_argument("--model", action="append", choices=FAMILIES,
                           help="model family; repeat for compare")
            p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=None,
                           help="standardize numeric features (default: per family)")
        if name == "report":
            p.add_argument("--sample-size", type=int, default=None,
                           help="boats relabeled to Hong Kong (default 3000)")
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except SailpriceError as exc:
        print(f"sailprice {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
