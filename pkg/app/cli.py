"""
命令行入口
  run <scenario>            执行场景并写出报告与清单
  verify <manifest>         按清单校验输出是否逐字节一致
  demo-diagrams             推理/进化示例的交换图与代价比较
  census <cpt-A> <cpt-B>    两个 CPT 超图文本之间的同态/同构普查

退出码：0 成功，1 分析在规模上无法判定或校验不一致，2 输入无效。
"""

import argparse
import logging
import os
import sys

project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from models.errors import CogSynError, ManifestError, ScenarioValidationError, UndecidedAtScaleError
from models.hypergraph import Hypergraph, format_fraction
from models.natural_transformation import demo_diagrams
from models.synergy_analysis import hom_iso_census
from utils.database import save_run_record
from utils.report_writer import TOOL_VERSION, verify, write_reports
from utils.scenario_loader import load_scenario, resolve_scenario_path
from utils.scenario_runner import run_scenario
from utils.visualization import gnuplot_series

EXIT_OK, EXIT_UNDECIDED, EXIT_INVALID = 0, 1, 2


def build_parser():
    parser = argparse.ArgumentParser(prog='cogsyn', description="认知协同模拟与分析")
    parser.add_argument('--verbose', '-v', action='store_true', help="输出调试日志")
    parser.add_argument('--version', action='version', version=f"%(prog)s {TOOL_VERSION}")
    subparsers = parser.add_subparsers(dest='command', required=True)

    run = subparsers.add_parser('run', help="执行场景文件")
    run.add_argument('scenario', help="场景文件路径或内置场景名")
    run.add_argument('--seed', type=int, default=None, help="覆盖各情境种子的总种子")
    run.add_argument('--jobs', type=int, default=1, help="情境级并行度")
    run.add_argument('--out-dir', default=os.environ.get('COGSYN_OUT_DIR'),
                     help="输出目录（默认取 COGSYN_OUT_DIR，否则 out/<场景名>）")
    run.add_argument('--partition-cells', type=int, default=None)
    run.add_argument('--weights', choices=['uniform', 'midpoint'], default=None)
    run.add_argument('--emit-gnuplot', action='store_true', help="额外写出 gnuplot 数据文件")
    run.add_argument('--no-archive', action='store_true', help="不写入运行档案库")

    check = subparsers.add_parser('verify', help="校验输出目录或 manifest.json")
    check.add_argument('manifest')
    check.add_argument('--rerun', action='store_true', help="重新执行场景并逐文件比较")
    check.add_argument('--jobs', type=int, default=1)

    demo = subparsers.add_parser('demo-diagrams', help="推理/进化交换图示例")
    demo.add_argument('--equal-costs', action='store_true', help="所有转移代价相同的对照组")

    census = subparsers.add_parser('census', help="两个 CPT 超图之间的同态/同构普查")
    census.add_argument('cpt_a')
    census.add_argument('cpt_b')
    census.add_argument('--cost-ceiling', type=int, default=2)
    census.add_argument('--size-bound', type=int, default=3)
    return parser


def _print_diagnostics(exc):
    print(f"❌ 场景无效: {exc.details.get('source') or ''}", file=sys.stderr)
    for field, reason in exc.diagnostics:
        print(f"   {field}: {reason}", file=sys.stderr)


def command_run(args):
    path = resolve_scenario_path(args.scenario)
    scenario = load_scenario(path)
    with open(path, 'r', encoding='utf-8') as handle:
        text = handle.read()
    out_dir = args.out_dir or os.path.join('out', scenario.name)
    if args.partition_cells is not None and args.partition_cells < 1:
        raise CogSynError(f"--partition-cells 必须为正: {args.partition_cells}")

    result = run_scenario(scenario, seed=args.seed, jobs=args.jobs,
                          partition_cells=args.partition_cells, weights=args.weights)
    overrides = {'seed': args.seed, 'partition_cells': args.partition_cells, 'weights': args.weights}
    write_reports(result, out_dir, text, overrides, gnuplot_series(result) if args.emit_gnuplot else None)
    if not args.no_archive:
        save_run_record(result, out_dir, TOOL_VERSION)

    print(f"📊 场景 {scenario.name}: {len(result.store)} 个情境, {len(result.records)} 条停滞记录")
    for report in result.synergy:
        print(f"   cog-syn[{'|'.join(report.processes)}] = {format_fraction(report.value)}")
    for (a, b), record in result.census:
        print(f"   census[{a}|{b}] n_hom={record.n_hom} n_iso={record.n_iso} ratio={format_fraction(record.ratio)}")
    if result.undecided:
        print(f"⚠️ 以下分析在当前规模下无法判定: {', '.join(result.undecided)}")
        return EXIT_UNDECIDED
    return EXIT_OK


def command_verify(args):
    outcome = verify(args.manifest, rerun=args.rerun, jobs=args.jobs)
    if outcome.ok:
        print(f"✅ 校验通过: {len(outcome.manifest.files)} 个文件与清单一致")
        return EXIT_OK
    print("❌ 校验失败，不一致的文件:")
    for name in outcome.mismatched:
        print(f"   {name}")
    return EXIT_UNDECIDED


def print_diagram_report(report):
    print("📊 交换图四角（转移集合的投影）")
    for corner, projection in report.corners.items():
        keys = ' → '.join(f"{t.source}->{t.target}" for t in sorted(projection.transitions,
                                                                      key=lambda t: (t.interval, t.situation)))
        print(f"   {corner}: cost={format_fraction(projection.cost)}  {keys or '(空)'}")
    comparison = report.comparison
    leg_x, leg_f, leg_y = comparison.legs
    print("📊 代价比较: cost(η^{A,B}_X) + cost(F_B(f)) + cost(η^{B,A}_Y)  vs  cost(F_A(f))")
    print(f"   腿代价: η^{{A,B}}_X={format_fraction(leg_x)}, F_B(f)={format_fraction(leg_f)}, "
          f"η^{{B,A}}_Y={format_fraction(leg_y)}")
    print(f"   间接 {format_fraction(comparison.indirect)}  直接 {format_fraction(comparison.direct)}  "
          f"差值 {format_fraction(comparison.margin)}")
    verdict = "✅ 间接路径更便宜" if comparison.holds else "❌ 不等式不成立"
    print(f"   {verdict}")
    swapped = report.swapped
    print(f"   交换 A/B 后: 间接 {format_fraction(swapped.indirect)}  直接 {format_fraction(swapped.direct)}  "
          f"{'成立' if swapped.holds else '不成立'}")


def command_demo(args):
    report = demo_diagrams(equal_costs=args.equal_costs)
    print_diagram_report(report)
    return EXIT_OK


def _read_hypergraph(path):
    with open(path, 'r', encoding='utf-8') as handle:
        return Hypergraph.from_text(handle.read(), os.path.basename(path))


def command_census(args):
    record = hom_iso_census(_read_hypergraph(args.cpt_a), _read_hypergraph(args.cpt_b),
                            args.cost_ceiling, args.size_bound)
    print(f"📊 n_hom={record.n_hom} n_iso={record.n_iso} ratio={format_fraction(record.ratio)} "
          f"pairs={record.pairs}")
    if record.truncated:
        print("⚠️ 普查被截断，结果不完整")
        return EXIT_UNDECIDED
    return EXIT_OK


COMMANDS = {
    'run': command_run,
    'verify': command_verify,
    'demo-diagrams': command_demo,
    'census': command_census,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ScenarioValidationError as exc:
        _print_diagnostics(exc)
        return EXIT_INVALID
    except ManifestError as exc:
        print(f"❌ {exc.message}", file=sys.stderr)
        for name in exc.missing:
            print(f"   缺少: {name}", file=sys.stderr)
        return EXIT_INVALID
    except UndecidedAtScaleError as exc:
        print(f"⚠️ {exc.message}", file=sys.stderr)
        return EXIT_UNDECIDED
    except CogSynError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"❌ 无法读取或写入文件: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
