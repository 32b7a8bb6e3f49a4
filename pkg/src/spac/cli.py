"""Command-line entry point.

Subcommands: protocol check, trace gen|analyze, sim run, dse run,
dse oracle, validate.  All artifacts are written under --out (default ".").
Exit codes: 0 success, 1 input/spec errors, 2 no feasible design.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .arch import ArchConfig
from .cyclesim import SimOptions, SwitchModel, back_annotate
from .dse import (Constraints, brute_force_enumerate, build_templates,
                  config_summary, cross_space, run_dse)
from .errors import NoFeasibleDesign, SpacError
from .presets import PRESETS, get_preset
from .protocol import compute_layout, header_overhead_ratio, parse_spec
from .report import make_manifest, pareto_scatter, write_json
from .resources import estimate_resources, load_profile, predict_freq_mhz
from .surrogate import run_surrogate
from .trace import (Trace, extract_features, gen_trace, load_trace,
                    save_trace, GEN_MODELS)


def _kv_pairs(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise SpacError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def _coerce(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def _load_protocol(path: str):
    with open(path) as fh:
        return parse_spec(fh.read())


def _arch_from_flags(args, spec, ports: int) -> ArchConfig:
    over = {k: _coerce(v) for k, v in _kv_pairs(args.arch).items()}
    over.setdefault("ports", ports)
    cfg = ArchConfig(**{k: v for k, v in over.items()
                        if k in ArchConfig.__dataclass_fields__})
    if "clock_mhz" not in over:
        cfg = cfg.with_(clock_mhz=predict_freq_mhz(cfg))
    return cfg


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_protocol_check(args) -> int:
    spec = _load_protocol(args.spec)
    plan = compute_layout(spec, args.width)
    print(f"protocol {spec.name}: header {spec.header_bits} bits "
          f"({spec.padded_header_bytes} B padded), flit width {args.width} b")
    straddles = 0
    print(f"{'field':<16} {'flit':>4} {'offset':>6} {'width':>5}  straddle")
    for e in plan.entries:
        mark = "yes" if e.straddles_boundary else ""
        straddles += e.straddles_boundary
        print(f"{e.name:<16} {e.first_flit_index:>4} {e.bit_offset_in_flit:>6} "
              f"{e.width_bits:>5}  {mark}")
    print(f"{straddles} straddle(s); header overhead at 64 B payload: "
          f"{header_overhead_ratio(spec, 64):.3f}")
    return 0


def cmd_trace_gen(args) -> int:
    if args.preset:
        preset = get_preset(args.preset)
        params = dict(preset.gen_params)
        model = preset.gen_model
    else:
        if not args.model:
            raise SpacError("need --model or --preset")
        params = {}
        model = args.model
    params.update({k: _coerce(v) for k, v in _kv_pairs(args.param).items()})
    trace = gen_trace(model, params, args.seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, args.name)
    save_trace(trace, path)
    print(f"wrote {len(trace.events)} events to {path}")
    return 0


def cmd_trace_analyze(args) -> int:
    trace = load_trace(args.trace, args.ports, args.link_rate_gbps)
    feats = extract_features(trace, args.window_ns)
    print(json.dumps(feats.to_dict(), indent=2))
    return 0


def _trace_and_spec(args):
    if args.preset:
        preset = get_preset(args.preset)
        spec = preset.spec()
        if args.trace:
            trace = load_trace(args.trace, args.ports, args.link_rate_gbps)
        else:
            trace = preset.trace(args.seed)
        return spec, trace, preset
    if not (args.protocol and args.trace):
        raise SpacError("need --preset, or --protocol and --trace")
    spec = _load_protocol(args.protocol)
    trace = load_trace(args.trace, args.ports, args.link_rate_gbps)
    return spec, trace, None


def cmd_sim_run(args) -> int:
    started = time.perf_counter()
    spec, trace, _ = _trace_and_spec(args)
    cfg = _arch_from_flags(args, spec, trace.port_count)
    model = SwitchModel(cfg, spec)
    if args.annotate:
        with open(args.annotate) as fh:
            model = back_annotate(model, json.load(fh))
        cfg = model.config
    if args.fidelity == "cycle":
        result = model.run(trace, SimOptions(warmup_ns=args.warmup_ns))
    else:
        result = run_surrogate(cfg, spec, trace, cfg.voq_depth_flits
                               if cfg.voq == "nxn" else cfg.shared_buffer_slots)
    payload = result.to_dict()
    payload["config"] = config_summary(cfg)
    payload["resources"] = estimate_resources(
        cfg, routing_key_bits=spec.routing_key_field.width_bits).to_dict()
    os.makedirs(args.out, exist_ok=True)
    out = os.path.join(args.out, f"sim_{args.fidelity}.json")
    manifest = make_manifest("sim run", [args.trace or args.preset],
                             args.seed, payload["config"], started)
    write_json(out, payload, manifest)
    print(f"p50 {result.latency_ns['p50']:.1f} ns  "
          f"p99 {result.latency_ns['p99']:.1f} ns  "
          f"delivered {result.delivered}  dropped {result.dropped}")
    print(f"wrote {out}")
    return 0


def _constraints_from_args(args, preset) -> Constraints:
    base = dict(preset.constraints) if preset else {}
    for name in ("sla_latency_p99_ns", "bram_budget_blocks", "drop_epsilon",
                 "delta", "top_k", "link_rate_gbps"):
        v = getattr(args, name, None)
        if v is not None:
            base[name] = v
    if "sla_latency_p99_ns" not in base or "bram_budget_blocks" not in base:
        raise SpacError("need --sla-latency-p99-ns and --bram-budget-blocks "
                        "(or a preset providing them)")
    return Constraints.from_dict(base)


def cmd_dse_run(args) -> int:
    started = time.perf_counter()
    spec, trace, preset = _trace_and_spec(args)
    constraints = _constraints_from_args(args, preset)
    report = run_dse(spec, trace, constraints)
    os.makedirs(args.out, exist_ok=True)
    payload = report.to_dict()
    manifest = make_manifest("dse run", [args.trace or args.preset],
                             args.seed, payload.get("optimal"), started)
    out = os.path.join(args.out, "dse_report.json")
    write_json(out, payload, manifest)
    pareto_scatter(report.accepted, report.pareto, report.optimal,
                   os.path.join(args.out, "pareto.svg"),
                   os.path.join(args.out, "pareto.csv"))
    opt = report.optimal.config
    print(f"optimal: {opt.key()}  bram={report.optimal.bram_blocks} "
          f"p99={report.optimal.verified_latency_p99_ns:.1f} ns")
    print(f"wrote {out}")
    if args.oracle:
        return _check_oracle(spec, trace, constraints, report, args)
    return 0


def _check_oracle(spec, trace, constraints, report, args) -> int:
    templates = build_templates(ports=trace.port_count,
                                arch_hints=spec.arch_hints,
                                widths=args.oracle_widths)
    space = cross_space(templates, tuple(args.oracle_depth_blocks))
    front, points = brute_force_enumerate(space, spec, trace, constraints,
                                          cap=args.space_cap)
    from .dse import dominates
    bad = [p for p in report.pareto
           if any(dominates(q, p) for q in front)]
    if bad:
        for p in bad:
            print(f"DOMINATED: {p.config.key()} "
                  f"({p.bram_blocks}, {p.verified_latency_p99_ns:.1f})",
                  file=sys.stderr)
        return 1
    print(f"oracle: all {len(report.pareto)} returned points non-dominated "
          f"within {len(points)} enumerated designs")
    return 0


def cmd_dse_oracle(args) -> int:
    started = time.perf_counter()
    spec, trace, preset = _trace_and_spec(args)
    constraints = _constraints_from_args(args, preset)
    templates = build_templates(ports=trace.port_count,
                                arch_hints=spec.arch_hints,
                                widths=args.oracle_widths)
    space = cross_space(templates, tuple(args.oracle_depth_blocks))
    front, points = brute_force_enumerate(space, spec, trace, constraints,
                                          cap=args.space_cap)
    os.makedirs(args.out, exist_ok=True)
    payload = {
        "evaluated": len(points),
        "front": [[p.bram_blocks, p.verified_latency_p99_ns,
                   config_summary(p.config)] for p in front],
    }
    out = os.path.join(args.out, "oracle_front.json")
    write_json(out, payload,
               make_manifest("dse oracle", [args.trace or args.preset],
                             args.seed, None, started))
    best = min(front, key=lambda p: p.bram_blocks) if len(front) else None
    pareto_scatter(points, front, best,
                   os.path.join(args.out, "oracle_pareto.svg"),
                   os.path.join(args.out, "oracle_pareto.csv"))
    print(f"front has {len(front)} of {len(points)} points; wrote {out}")
    return 0


def cmd_validate(args) -> int:
    from .checks import run_suite
    return 0 if run_suite(quick=args.quick) else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_trace_source(p):
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--protocol", help="protocol definition file")
    p.add_argument("--trace", help="trace CSV path")
    p.add_argument("--ports", type=int, default=8)
    p.add_argument("--link-rate-gbps", type=float, default=10.0,
                   dest="link_rate_gbps")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=".")


def _add_constraints(p):
    p.add_argument("--sla-latency-p99-ns", type=float, dest="sla_latency_p99_ns")
    p.add_argument("--bram-budget-blocks", type=int, dest="bram_budget_blocks")
    p.add_argument("--drop-epsilon", type=float, dest="drop_epsilon")
    p.add_argument("--delta", type=float)
    p.add_argument("--top-k", type=int, dest="top_k")


def _add_oracle(p):
    p.add_argument("--oracle-depth-blocks", type=int, nargs="+",
                   default=[1, 2, 4, 8])
    p.add_argument("--oracle-widths", type=int, nargs="+", default=[256, 512])
    p.add_argument("--space-cap", type=int, default=512)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spac",
        description="Trace-driven switch simulation and design-space "
                    "exploration for protocol/switch co-design.")
    sub = ap.add_subparsers(dest="command", required=True)

    proto = sub.add_parser("protocol").add_subparsers(dest="sub", required=True)
    p = proto.add_parser("check", help="validate a protocol file and print its layout")
    p.add_argument("spec")
    p.add_argument("--width", type=int, default=256)
    p.set_defaults(fn=cmd_protocol_check)

    tr = sub.add_parser("trace").add_subparsers(dest="sub", required=True)
    g = tr.add_parser("gen", help="generate a synthetic trace")
    g.add_argument("--model", choices=GEN_MODELS)
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--param", action="append", metavar="K=V")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--out", default=".")
    g.add_argument("--name", default="trace.csv")
    g.set_defaults(fn=cmd_trace_gen)
    a = tr.add_parser("analyze", help="print trace features as JSON")
    a.add_argument("trace")
    a.add_argument("--window-ns", type=int, default=None, dest="window_ns")
    a.add_argument("--ports", type=int, default=8)
    a.add_argument("--link-rate-gbps", type=float, default=10.0,
                   dest="link_rate_gbps")
    a.set_defaults(fn=cmd_trace_analyze)

    sim = sub.add_parser("sim").add_subparsers(dest="sub", required=True)
    s = sim.add_parser("run", help="simulate a trace through one configuration")
    _add_trace_source(s)
    s.add_argument("--fidelity", choices=("cycle", "surrogate"), default="cycle")
    s.add_argument("--arch", action="append", metavar="K=V")
    s.add_argument("--annotate", help="JSON with measured hardware timing")
    s.add_argument("--warmup-ns", type=float, default=0.0, dest="warmup_ns")
    s.set_defaults(fn=cmd_sim_run)

    dse = sub.add_parser("dse").add_subparsers(dest="sub", required=True)
    d = dse.add_parser("run", help="run the staged exploration")
    _add_trace_source(d)
    _add_constraints(d)
    _add_oracle(d)
    d.add_argument("--oracle", action="store_true",
                   help="verify the result against brute-force enumeration")
    d.set_defaults(fn=cmd_dse_run)
    o = dse.add_parser("oracle", help="brute-force enumerate a design space")
    _add_trace_source(o)
    _add_constraints(o)
    _add_oracle(o)
    o.set_defaults(fn=cmd_dse_oracle)

    v = sub.add_parser("validate", help="run the acceptance suite")
    v.add_argument("--quick", action="store_true")
    v.set_defaults(fn=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except NoFeasibleDesign as exc:
        print(f"error: {exc}", file=sys.stderr)
        for entry in exc.ledger:
            print(f"  [{entry['stage']}] {entry['config']}: {entry['reason']}",
                  file=sys.stderr)
        return 2
    except SpacError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
