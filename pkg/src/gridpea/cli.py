"""Command-line pipeline: gen | train | eval | select | analyze | report.

Every command is deterministic given its flags and seed. Exit codes: 0 on
success, 1 on validation errors (including bad flags), 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .dataset import (
    Dataset,
    generate_campaign,
    read_csv,
    schema_hash,
    write_csv,
)
from .errors import GridPeaError
from .faults import FaultSpec, FaultType, sequence_oracle, solve_single_fault
from .ml import (
    evaluate_predictions,
    grid_search,
    load_model,
    predict,
    save_model,
    select_best,
    split,
    train_model,
)
from .ml.selection import TABLE_ORDER, default_grids
from .network import ieee14, load_case
from .postevent import analyze, deviation_localize
from .powerflow import solve_nr
from .scenarios import enumerate_n1, enumerate_simultaneous, enumerate_single
from .windows import NoiseConfig, WindowingConfig, read_window, write_window

MODEL_CHOICES = ("dt", "svm", "knn", "ann", "all")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_net(args):
    if getattr(args, "case", None):
        with open(args.case, encoding="utf-8") as fh:
            return load_case(fh.read())
    return ieee14()


def _noise(args) -> NoiseConfig:
    return NoiseConfig(
        sigma_mag=args.noise_mag,
        sigma_ang=args.noise_ang,
        sigma_freq=args.noise_freq,
        seed=args.seed,
    )


def _windowing(args) -> WindowingConfig:
    return WindowingConfig(
        n_pre=args.frames_pre, n_fault=args.frames_fault, frame_rate=args.frame_rate
    )


def _parse_fault_spec(text: str) -> FaultSpec:
    parts = text.split(":")
    if len(parts) != 4:
        raise GridPeaError("fault spec must be LINE:D:TYPE:ZF, e.g. 3:0.4:AG:0.05")
    try:
        return FaultSpec(
            line=int(parts[0]), d=float(parts[1]),
            ftype=FaultType.from_code(parts[2]), zf=float(parts[3]),
        )
    except ValueError as e:
        raise GridPeaError(f"bad fault spec {text!r}: {e}") from e


def _cmd_gen(args) -> int:
    net = _load_net(args)
    if args.dump_fault:
        spec = _parse_fault_spec(args.dump_fault)
        pf = solve_nr(net, tol=1e-10)
        sol, node = solve_single_fault(net, pf, spec)
        oracle = sequence_oracle(net, pf, spec)
        v = sol.bus_v_abc()
        doc = {
            "spec": {"line": spec.line, "d": spec.d, "ftype": spec.ftype.code, "zf": spec.zf},
            "bus_voltages": {
                str(b): {
                    ph: [float(np.abs(v[b, i])), float(np.degrees(np.angle(v[b, i])))]
                    for i, ph in enumerate("abc")
                }
                for b in range(net.n_bus)
            },
            "fault_current": {
                ph: [float(np.abs(c)), float(np.degrees(np.angle(c)))]
                for ph, c in zip("abc", sol.fault_phase_currents(node))
            },
            "oracle_fault_current": {
                ph: [float(np.abs(c)), float(np.degrees(np.angle(c)))]
                for ph, c in zip("abc", oracle.i_phase)
            },
        }
        text = json.dumps(doc, indent=2)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return 0

    if not args.out:
        raise GridPeaError("gen requires --out for campaign generation")
    ds = generate_campaign(
        campaign=args.campaign,
        net=net,
        outage=args.outage,
        k=args.k,
        n_normal=args.n_normal,
        windowing=_windowing(args),
        noise=_noise(args),
    )
    write_csv(ds, args.out)
    if args.dump_window is not None:
        idx, path = int(args.dump_window[0]), args.dump_window[1]
        from .dataset import WindowSynthesizer
        from .network import apply_outage

        gen_net = apply_outage(net, args.outage) if args.campaign == "n1" else net
        if args.campaign == "single":
            scenarios = enumerate_single(gen_net, n_normal=args.n_normal)
        elif args.campaign == "n1":
            scenarios = enumerate_n1(net, args.outage, n_normal=args.n_normal)
        else:
            scenarios = enumerate_simultaneous(gen_net, k=args.k, seed=args.seed,
                                               n_normal=args.n_normal)
        if not 0 <= idx < len(scenarios):
            raise GridPeaError(f"scenario index {idx} out of range 0..{len(scenarios)-1}")
        synth = WindowSynthesizer(gen_net, windowing=_windowing(args), noise=_noise(args))
        write_window(synth.window(scenarios[idx]), path)
    print(f"wrote {len(ds.samples)} samples to {args.out}")
    return 0


def _dataset_xy(ds: Dataset):
    x = ds.feature_matrix()
    y = ds.labels("combined202")
    return x, y, schema_hash(ds.schema)


def _train_one(kind, x_tr, y_tr, args, h, label_space):
    config = None
    if args.grid:
        config, _ = grid_search(kind, x_tr, y_tr, seed=args.seed, schema_hash=h)
    elif kind == "ann":
        config = default_grids(args.seed)["ann"][0]
    meta = {"seed": args.seed, "label_space": label_space, "split": args.split}
    return train_model(kind, x_tr, y_tr, config=config, schema_hash=h, train_meta=meta)


def _cmd_train(args) -> int:
    ds = read_csv(args.data)
    x, y, h = _dataset_xy(ds)
    label_space = ds.meta.get("label_space", "combined202")
    tr, va = split(y, train_fraction=args.split, seed=args.seed)
    kinds = TABLE_ORDER if args.model == "all" else (args.model,)
    for kind in kinds:
        model = _train_one(kind, x[tr], y[tr], args, h, label_space)
        report = evaluate_predictions(y[va], predict(model, x[va], h))
        out = args.out
        if args.model == "all":
            out = out.replace(".json", f".{kind}.json") if out.endswith(".json") else f"{out}.{kind}"
        save_model(model, out)
        print(
            f"{kind}: accuracy {report.accuracy:.2f}  precision {report.macro_precision:.2f}  "
            f"recall {report.macro_recall:.2f}  f1 {report.macro_f1:.2f}  -> {out}"
        )
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    ds = read_csv(args.data)
    x, y, h = _dataset_xy(ds)
    report = evaluate_predictions(y, predict(model, x, h))
    doc = report.to_json_obj()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    print(
        f"accuracy {report.accuracy:.2f}  precision {report.macro_precision:.2f}  "
        f"recall {report.macro_recall:.2f}  f1 {report.macro_f1:.2f}"
    )
    return 0


def _cmd_select(args) -> int:
    ds = read_csv(args.data)
    x, y, h = _dataset_xy(ds)
    label_space = ds.meta.get("label_space", "combined202")
    tr, va = split(y, train_fraction=args.split, seed=args.seed)
    models = {}
    for kind in TABLE_ORDER:
        models[kind] = _train_one(kind, x[tr], y[tr], args, h, label_space)
    best_kind, best_model, reports, table = select_best(models, x[va], y[va], h)
    save_model(best_model, args.out)
    doc = {
        "best": best_kind,
        "table": table,
        "reports": {k: r.to_json_obj() for k, r in reports.items()},
    }
    report_path = args.report or (args.out + ".report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(_render_table(table, "text"))
    print(f"selected {best_kind} -> {args.out}")
    return 0


def _cmd_analyze(args) -> int:
    net = _load_net(args)
    if args.dump_prefault:
        pf = solve_nr(net, tol=1e-10)
        doc = {
            str(b): [float(m), float(a)]
            for b, (m, a) in enumerate(zip(pf.v_mag(), pf.v_ang_deg()))
        }
        with open(args.dump_prefault, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        if not args.model or not args.window:
            return 0
    if not args.model or not args.window:
        raise GridPeaError("analyze requires --model and --window")
    model = load_model(args.model)
    window = read_window(args.window)
    verdict = analyze(model, window, tau=args.tau)
    print(json.dumps(verdict.to_json_obj(), indent=2))
    return 0


def _render_table(rows, fmt: str) -> str:
    header = ("Model", "Accuracy(%)", "Precision(%)", "Recall(%)", "F1-score(%)")
    body = [
        (
            r["model"].upper(),
            f"{r['accuracy']:.2f}",
            f"{r['precision']:.2f}",
            f"{r['recall']:.2f}",
            f"{r['f1']:.2f}",
        )
        for r in rows
    ]
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |",
                 "|" + "|".join("---" for _ in header) + "|"]
        lines += ["| " + " | ".join(row) + " |" for row in body]
        return "\n".join(lines)
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in body]
    return "\n".join(lines)


def _cmd_report(args) -> int:
    with open(args.infile, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "table" in doc:
        print(_render_table(doc["table"], args.format))
        if "best" in doc:
            print(f"\nbest model: {doc['best'].upper()}")
    elif "accuracy" in doc:
        rows = [{
            "model": doc.get("model", "model"),
            "accuracy": doc["accuracy"],
            "precision": doc["macro_precision"],
            "recall": doc["macro_recall"],
            "f1": doc["macro_f1"],
        }]
        print(_render_table(rows, args.format))
    else:
        raise GridPeaError("unrecognized report document")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridpea", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a dataset campaign")
    p.add_argument("--campaign", choices=("single", "n1", "simultaneous"), default="single")
    p.add_argument("--outage", type=int, default=None, help="line id out of service (n1)")
    p.add_argument("--k", type=int, default=1200, help="two-event scenario count (simultaneous)")
    p.add_argument("--n-normal", type=int, default=320)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-mag", type=float, default=0.005)
    p.add_argument("--noise-ang", type=float, default=0.1)
    p.add_argument("--noise-freq", type=float, default=0.002)
    p.add_argument("--frames-pre", type=int, default=2)
    p.add_argument("--frames-fault", type=int, default=4)
    p.add_argument("--frame-rate", type=float, default=30.0)
    p.add_argument("--case", default=None, help="case JSON (default: embedded IEEE-14)")
    p.add_argument("--out", default=None, help="dataset CSV path")
    p.add_argument("--dump-fault", default=None, metavar="LINE:D:TYPE:ZF",
                   help="write one fault solution as JSON instead of a campaign")
    p.add_argument("--dump-window", nargs=2, default=None, metavar=("IDX", "PATH"),
                   help="also write scenario IDX's window JSON")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="train one model (or all four)")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=MODEL_CHOICES, default="ann")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.9)
    p.add_argument("--grid", action=argparse.BooleanOptionalAction, default=False,
                   help="tune hyperparameters on an inner split first")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a model artifact on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None, help="EvalReport JSON path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("select", help="train all four models and keep the best")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.9)
    p.add_argument("--grid", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", required=True, help="best-model artifact path")
    p.add_argument("--report", default=None, help="comparison table JSON path")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("analyze", help="turn a captured window into a verdict")
    p.add_argument("--model", default=None)
    p.add_argument("--window", default=None)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--case", default=None)
    p.add_argument("--dump-prefault", default=None,
                   help="write the pre-fault power flow as JSON")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("report", help="render a report JSON as text or markdown")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=("text", "markdown"), default="text")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GridPeaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
