"""Command line entry point: dataset generation, training, evaluation and sweeps.

Experiments are described by a JSON config file. Results are CSV rows, one
per (decoder, p_eval, dataset_size).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import nn
from .baselines import baseline_error_rate
from .codes import FAMILIES, SURFACE, build_code, describe
from .dataset import generate_dataset, read_dataset, write_dataset
from .decode import ExactL2Predictor, NetworkPredictor, logical_error_rate
from .diagnosis import analyze, build_scheme
from .errors import TopoDecodeError
from .noise import KINDS, NoiseModel

log = logging.getLogger("topodecode")

EXIT_OK, EXIT_CONFIG, EXIT_STAGE = 0, 2, 3

CSV_COLUMNS = ["config_hash", "family", "d", "scheme", "decoder", "p_train", "p_eval",
               "dataset_size", "trials", "rate", "ci_low", "ci_high", "wall_seconds"]
BASELINES = ("md", "mwpm")


class ConfigError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage


@dataclass
class ExperimentConfig:
    family: str = "surface_rotated"
    d: int = 3
    noise: str = "bit_flip"
    p_train: float = 0.1
    p_eval: list = field(default_factory=lambda: [0.1])
    scheme: str = "uniform"
    model: str = "mlp"
    arch: dict = field(default_factory=dict)
    dataset_size: list = field(default_factory=lambda: [100_000])
    epochs: int = 20
    batch_size: int = 256
    weight_decay: float = 0.0
    seeds: dict = field(default_factory=lambda: {"data": 1, "init": 0, "shuffle": 0, "eval": 99})
    trials: int = 100_000
    decoder: list = field(default_factory=list)
    threads: int | None = None
    record_time: bool = True

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        cfg._normalise()
        cfg.validate()
        return cfg

    def _normalise(self):
        for name in ("p_eval", "dataset_size", "decoder"):
            v = getattr(self, name)
            if not isinstance(v, list):
                setattr(self, name, [v])
        self.seeds = {**ExperimentConfig().seeds, **self.seeds}

    def validate(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}")
        if not isinstance(self.d, int) or self.d < 3 or self.d % 2 == 0:
            raise ConfigError("d must be an odd integer >= 3")
        if self.noise not in KINDS:
            raise ConfigError(f"noise must be one of {KINDS}")
        for p in [self.p_train, *self.p_eval]:
            if not isinstance(p, (int, float)) or not 0 <= p < 1:
                raise ConfigError(f"p values must lie in [0, 1), got {p!r}")
        if not self.p_eval:
            raise ConfigError("p_eval is empty")
        if self.scheme not in ("uniform", "short"):
            raise ConfigError("scheme must be 'uniform' or 'short'")
        if self.model not in ("mlp", "cnn", "none"):
            raise ConfigError("model must be 'mlp', 'cnn' or 'none'")
        if self.model == "cnn" and self.family not in SURFACE:
            raise ConfigError("the cnn model needs a surface family")
        for name in ("epochs", "batch_size", "trials"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1")
        if any(not isinstance(v, int) or v < 1 for v in self.dataset_size):
            raise ConfigError("dataset sizes must be integers >= 1")
        bad = [x for x in self.decoder if x not in BASELINES]
        if bad:
            raise ConfigError(f"unknown baseline decoders {bad}")
        if any(not isinstance(v, int) for v in self.seeds.values()):
            raise ConfigError("seeds must be integers")

    def hash(self) -> str:
        d = asdict(self)
        d.pop("threads")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        return ExperimentConfig.from_dict(raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def stage(name):
    """Decorator naming the stage in any failure it raises."""
    def wrap(fn):
        def inner(*a, **kw):
            try:
                return fn(*a, **kw)
            except (ConfigError, StageError):
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc
        return inner
    return wrap


# ---------------------------------------------------------------- stages

def setup(cfg: ExperimentConfig):
    try:
        code = build_code(cfg.family, cfg.d)
    except TopoDecodeError as exc:
        raise ConfigError(str(exc)) from None
    return code, build_scheme(code, cfg.scheme)


@stage("gen-data")
def gen_data(cfg, code, scheme, size):
    model = NoiseModel(cfg.noise, cfg.p_train)
    return generate_dataset(code, scheme, model, size, cfg.seeds["data"], cfg.threads)


def _inputs(code, net_kind, s):
    return nn.syndrome_grids(code, s) if net_kind == "cnn" else s.astype(np.float64)


@stage("train")
def train_model(cfg, code, scheme, ds):
    if ds.header["family"] != code.family or ds.header["d"] != code.d \
            or ds.header["scheme_id"] != scheme.scheme_id():
        raise ConfigError("dataset does not match the configured code and scheme")
    a = dict(cfg.arch)
    bn = bool(a.pop("batchnorm", False))
    if cfg.model == "cnn":
        net = nn.build_cnn(code.family, code.d, code.grid_shape, scheme.rows, a or None,
                           batchnorm=bn, seed=cfg.seeds["init"])
    else:
        hidden = tuple(a.pop("hidden", nn.default_hidden(code.d)))
        net = nn.build_mlp(code.num_checks, scheme.rows, hidden, batchnorm=bn,
                           seed=cfg.seeds["init"])
    x = _inputs(code, cfg.model, ds.s)
    net, trace = nn.train(net, x, ds.g.astype(np.float64), cfg.epochs, cfg.batch_size,
                          seed=cfg.seeds["shuffle"], weight_decay=cfg.weight_decay,
                          log=lambda ep, loss, lr: log.info("epoch %d loss %.5f lr %.2e",
                                                            ep, loss, lr))
    net.meta.update({"family": code.family, "d": code.d, "scheme": scheme.name,
                     "scheme_id": scheme.scheme_id(), "p_train": cfg.p_train,
                     "dataset_size": len(ds), "noise": cfg.noise, "trace": trace})
    return net


def _row(cfg, decoder, p_train, p_eval, size, res, wall):
    return {"config_hash": cfg.hash(), "family": cfg.family, "d": cfg.d, "scheme": cfg.scheme,
            "decoder": decoder, "p_train": "" if p_train is None else f"{p_train:g}",
            "p_eval": f"{p_eval:g}", "dataset_size": size, "trials": res["trials"],
            "rate": f"{res['rate']:.6g}", "ci_low": f"{res['ci_low']:.6g}",
            "ci_high": f"{res['ci_high']:.6g}",
            "wall_seconds": f"{wall:.2f}" if cfg.record_time else ""}


@stage("eval")
def eval_model(cfg, code, scheme, net):
    if net.meta.get("scheme_id") not in (None, scheme.scheme_id()):
        raise ConfigError("checkpoint was trained for a different scheme")
    kind = net.meta.get("model", "mlp")
    pred = NetworkPredictor(net, code, grid=kind == "cnn")
    rows = []
    for p in cfg.p_eval:
        t = time.perf_counter()
        res = logical_error_rate(code, scheme, pred, NoiseModel(cfg.noise, p), cfg.trials,
                                 cfg.seeds["eval"], cfg.threads)
        rows.append(_row(cfg, kind, net.meta.get("p_train"), p,
                         net.meta.get("dataset_size", 0), res, time.perf_counter() - t))
    return rows


@stage("baseline-eval")
def eval_baselines(cfg, code, decoders):
    rows = []
    for dec in decoders:
        for p in cfg.p_eval:
            t = time.perf_counter()
            res = baseline_error_rate(code, NoiseModel(cfg.noise, p), dec, cfg.trials,
                                      cfg.seeds["eval"])
            rows.append(_row(cfg, dec, None, p, 0, res, time.perf_counter() - t))
    return rows


@stage("oracle-eval")
def eval_oracle(cfg, code, scheme):
    rows = []
    for p in cfg.p_eval:
        model = NoiseModel(cfg.noise, p)
        t = time.perf_counter()
        res = logical_error_rate(code, scheme, ExactL2Predictor(code, scheme, model), model,
                                 cfg.trials, cfg.seeds["eval"], threads=1)
        rows.append(_row(cfg, "oracle", None, p, 0, res, time.perf_counter() - t))
    return rows


def run(cfg: ExperimentConfig, checkpoint_dir: Path | None = None) -> list[dict]:
    """gen-data, train and eval for each dataset size, then the baselines."""
    code, scheme = setup(cfg)
    rows = []
    if cfg.model != "none":
        for size in cfg.dataset_size:
            ds = gen_data(cfg, code, scheme, size)
            net = train_model(cfg, code, scheme, ds)
            if checkpoint_dir is not None:
                checkpoint_dir.mkdir(parents=True, exist_ok=True)
                nn.save_network(net, checkpoint_dir / f"{cfg.hash()}_{size}.qnn")
            rows += eval_model(cfg, code, scheme, net)
    rows += eval_baselines(cfg, code, cfg.decoder)
    return rows


def write_rows(rows, out) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(out).write_text(buf.getvalue())


# ---------------------------------------------------------------- commands

def cmd_code_info(args):
    try:
        code = build_code(args.family, args.d)
    except TopoDecodeError as exc:
        raise ConfigError(str(exc)) from None
    info = describe(code, with_distance=args.distance)
    if args.brief:
        info.pop("stabilizers")
    print(json.dumps(info, indent=2))


def cmd_analyze_scheme(args):
    try:
        code = build_code(args.family, args.d)
    except TopoDecodeError as exc:
        raise ConfigError(str(exc)) from None
    out = stage("analyze")(lambda: analyze(build_scheme(code, args.scheme)))()
    print(json.dumps({"family": args.family, "d": args.d, "scheme": args.scheme, **out},
                     indent=2))


def cmd_gen_data(args):
    cfg = load_config(args.config)
    code, scheme = setup(cfg)
    size = args.size or cfg.dataset_size[0]
    ds = gen_data(cfg, code, scheme, size)
    stage("gen-data")(write_dataset)(ds, args.out)
    log.info("wrote %d samples to %s", len(ds), args.out)


def cmd_train(args):
    cfg = load_config(args.config)
    code, scheme = setup(cfg)
    if cfg.model == "none":
        raise ConfigError("model is 'none'; nothing to train")
    ds = stage("train")(read_dataset)(args.data)
    net = train_model(cfg, code, scheme, ds)
    stage("train")(nn.save_network)(net, args.out)
    log.info("saved checkpoint to %s", args.out)


def cmd_eval(args):
    cfg = load_config(args.config)
    code, scheme = setup(cfg)
    net = stage("eval")(nn.load_network)(args.model)
    rows = eval_model(cfg, code, scheme, net)
    if args.csv:
        write_rows(rows, args.out)
        return
    results = [{"decoder": r["decoder"], "p_eval": float(r["p_eval"]), "rate": float(r["rate"]),
                "ci_low": float(r["ci_low"]), "ci_high": float(r["ci_high"]),
                "trials": int(r["trials"]), "seed": cfg.seeds["eval"]} for r in rows]
    text = json.dumps({"config_hash": cfg.hash(), "config": asdict(cfg), "results": results},
                      indent=2) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


def cmd_baseline_eval(args):
    cfg = load_config(args.config)
    code, _ = setup(cfg)
    decoders = cfg.decoder or ["md"]
    write_rows(eval_baselines(cfg, code, decoders), args.out)


def cmd_oracle_eval(args):
    cfg = load_config(args.config)
    code, scheme = setup(cfg)
    write_rows(eval_oracle(cfg, code, scheme), args.out)


def cmd_sweep(args):
    cfg = load_config(args.config)
    ckpt = Path(args.checkpoints) if args.checkpoints else None
    write_rows(run(cfg, ckpt), args.out)


CONFIG_HELP = """\
config keys (JSON object) and defaults:
  family        surface_rotated   one of surface_unrotated, surface_rotated, color_488, color_666
  d             3                 odd distance >= 3
  noise         bit_flip          bit_flip or depolarizing
  p_train       0.1               training noise strength
  p_eval        [0.1]             evaluation noise strengths
  scheme        uniform           uniform or short
  model         mlp               mlp, cnn (surface families only) or none
  arch          {}                overrides: hidden, batchnorm, filters, channels, fc, padding
  dataset_size  [100000]          training set sizes, one trained model each
  epochs        20
  batch_size    256
  weight_decay  0.0
  seeds         {"data": 1, "init": 0, "shuffle": 0, "eval": 99}
  trials        100000            evaluation samples per p_eval
  decoder       []                baselines to add: md, mwpm
  threads       null              worker count (TOPODECODE_THREADS caps it)
  record_time   true              false leaves wall_seconds empty for byte-stable output

exit codes: 0 success, 2 config error, 3 stage failure
"""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topodecode", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog=CONFIG_HELP)
    p.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, epilog=CONFIG_HELP,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("code-info", cmd_code_info, "print parameters and stabilizers of a code")
    sp.add_argument("--family", required=True, choices=FAMILIES)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--distance", action="store_true", help="also verify the distance by search")
    sp.add_argument("--brief", action="store_true", help="omit the stabilizer table")

    sp = add("analyze-scheme", cmd_analyze_scheme, "faithfulness and m, M, N of a scheme")
    sp.add_argument("--family", required=True, choices=FAMILIES)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--scheme", default="uniform", choices=("uniform", "short"))

    sp = add("gen-data", cmd_gen_data, "sample a training set into a .qds file")
    sp.add_argument("config")
    sp.add_argument("--out", required=True)
    sp.add_argument("--size", type=int, help="sample count (default: first dataset_size)")

    sp = add("train", cmd_train, "train a model on a .qds file and save a .qnn checkpoint")
    sp.add_argument("config")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)

    sp = add("eval", cmd_eval, "logical error rate of a checkpoint at each p_eval (JSON)")
    sp.add_argument("config")
    sp.add_argument("--model", required=True)
    sp.add_argument("--out", default="-")
    sp.add_argument("--csv", action="store_true", help="emit sweep-style CSV rows instead")

    sp = add("baseline-eval", cmd_baseline_eval, "logical error rate of md / mwpm decoders")
    sp.add_argument("config")
    sp.add_argument("--out", default="-")

    sp = add("oracle-eval", cmd_oracle_eval, "logical error rate with the exact L2 diagnosis (n <= 13)")
    sp.add_argument("config")
    sp.add_argument("--out", default="-")

    sp = add("sweep", cmd_sweep, "full pipeline over dataset sizes and p_eval, plus baselines")
    sp.add_argument("config")
    sp.add_argument("--out", default="-")
    sp.add_argument("--checkpoints", help="directory for trained checkpoints")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
