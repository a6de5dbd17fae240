import os
import sys

import pandas as pd
import streamlit as st

# 获取项目根目录
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, project_root)

from models.errors import CogSynError, ScenarioValidationError
from models.hypergraph import format_fraction
from models.natural_transformation import demo_diagrams
from utils.report_writer import report_frames, workbook_bytes
from utils.scenario_loader import bundled_scenarios_dir, parse_scenario
from utils.scenario_runner import run_scenario
from utils.visualization import generate_stuckness_timeline, generate_synergy_chart

try:
    from utils.database import init_db, load_run_records, save_run_record
except ImportError:
    st.error("无法从 'utils.database' 导入运行档案库函数。")
    st.stop()


def list_bundled_scenarios():
    directory = bundled_scenarios_dir()
    if not os.path.isdir(directory):
        return []
    return sorted(name[:-len('.toml')] for name in os.listdir(directory) if name.endswith('.toml'))


def load_scenario_text(source, uploaded):
    """内置场景按名称读取，上传文件按 UTF-8 解码"""
    if uploaded is not None:
        return uploaded.getvalue().decode('utf-8'), uploaded.name
    path = os.path.join(bundled_scenarios_dir(), f"{source}.toml")
    with open(path, 'r', encoding='utf-8') as handle:
        return handle.read(), path


def display_scenario_summary(scenario):
    col1, col2, col3, col4 = st.columns(4)
    col1.metric("情境数", len(scenario.situations))
    col2.metric("认知过程", len(scenario.processes))
    col3.metric("模式", len(scenario.catalog))
    col4.metric("步数", scenario.ticks)
    with st.expander("📋 情境与日程"):
        st.dataframe(pd.DataFrame([{
            'situation': s.situation,
            'seed': s.seed,
            'schedule': ' → '.join(s.schedule),
            'branch_of': f"{s.branch_of[0]}@{s.branch_of[1]}" if s.branch_of else '-',
        } for s in scenario.situations]), use_container_width=True)


def display_synergy_results(result):
    if not result.synergy:
        st.info("场景没有请求协同分析")
        return
    st.subheader("🤝 协同指数")
    cols = st.columns(len(result.synergy))
    for col, report in zip(cols, result.synergy):
        col.metric(' | '.join(report.processes), format_fraction(report.value), help=f"≈ {float(report.value):.4f}")

    labels = [' | '.join(report.processes) for report in result.synergy]
    chosen = st.selectbox("查看单元明细", labels)
    report = result.synergy[labels.index(chosen)]
    st.plotly_chart(generate_synergy_chart(report), use_container_width=True)


def display_stuckness(result):
    st.subheader("📉 停滞度")
    situations = sorted({r.situation for r in result.records})
    if not situations:
        st.info("没有停滞记录")
        return
    situation = st.selectbox("选择情境", situations)
    st.plotly_chart(generate_stuckness_timeline(result, situation), use_container_width=True)


def display_reports(result):
    frames = report_frames(result)
    tabs = st.tabs([f"📄 {name}" for name in frames])
    for tab, (name, df) in zip(tabs, frames.items()):
        with tab:
            st.dataframe(df, use_container_width=True)
            st.download_button(
                label=f"💾 下载 {name}.csv",
                data=df.to_csv(index=False, lineterminator='\n'),
                file_name=f"{name}.csv",
                mime="text/csv",
                key=f"download-{name}",
            )
    st.download_button(
        label="💾 下载完整报告 (xlsx)",
        data=workbook_bytes(result),
        file_name=f"{result.scenario.name}.xlsx",
        mime="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
    )


def display_diagram_demo():
    st.header("🧭 推理/进化交换图")
    equal_costs = st.checkbox("所有转移代价相同（对照组）", value=False)
    report = demo_diagrams(equal_costs=equal_costs)
    st.dataframe(pd.DataFrame([{
        '角': corner,
        '代价': format_fraction(projection.cost),
        '转移数': len(projection.transitions),
    } for corner, projection in report.corners.items()]), use_container_width=True)

    comparison = report.comparison
    col1, col2, col3 = st.columns(3)
    col1.metric("间接代价", format_fraction(comparison.indirect))
    col2.metric("直接代价", format_fraction(comparison.direct))
    col3.metric("差值", format_fraction(comparison.margin))
    if comparison.holds:
        st.success("✅ 经由另一过程绕行的间接路径更便宜")
    else:
        st.warning("⚠️ 代价不等式不成立")


def display_run_archive():
    st.header("🗂️ 运行档案")
    records = load_run_records()
    if records.empty:
        st.info("档案库中还没有运行记录")
    else:
        st.dataframe(records, use_container_width=True)


def main():
    st.set_page_config(page_title="认知协同模拟", layout="wide")
    init_db()

    st.title("🧠 认知协同模拟与分析")
    st.caption("多个认知过程在共享超图记忆上的停滞度与协同指数")

    st.sidebar.header("📁 场景")
    bundled = list_bundled_scenarios()
    source = st.sidebar.selectbox("内置场景", bundled) if bundled else None
    uploaded = st.sidebar.file_uploader("或上传场景文件 (TOML)", type=['toml'])

    st.sidebar.header("⚙️ 运行设置")
    use_seed = st.sidebar.checkbox("覆盖种子", value=False)
    seed = st.sidebar.number_input("总种子", min_value=0, value=0, step=1) if use_seed else None
    partition_cells = st.sidebar.number_input("划分单元数", min_value=1, max_value=100, value=10)
    weights = st.sidebar.selectbox("单元权重", ['midpoint', 'uniform'])
    jobs = st.sidebar.number_input("并行度", min_value=1, max_value=16, value=1)

    tab1, tab2, tab3 = st.tabs(["🔬 场景分析", "🧭 交换图示例", "🗂️ 运行档案"])

    with tab1:
        if source is None and uploaded is None:
            st.info("请选择或上传场景文件")
        else:
            try:
                text, origin = load_scenario_text(source, uploaded)
                scenario = parse_scenario(text, origin)
            except ScenarioValidationError as exc:
                st.error("❌ 场景无效")
                st.dataframe(pd.DataFrame(exc.diagnostics, columns=['字段', '原因']), use_container_width=True)
                scenario = None
            except UnicodeDecodeError:
                st.error("❌ 场景文件不是 UTF-8 编码")
                scenario = None

            if scenario is not None:
                display_scenario_summary(scenario)
                if st.button("▶️ 运行场景", type="primary"):
                    with st.spinner("正在模拟与分析..."):
                        try:
                            result = run_scenario(scenario, seed=None if seed is None else int(seed),
                                                  jobs=int(jobs), partition_cells=int(partition_cells),
                                                  weights=weights)
                            save_run_record(result)
                            st.session_state['result'] = result
                        except CogSynError as exc:
                            st.error(f"❌ 运行失败: {exc}")

                result = st.session_state.get('result')
                if result is not None and result.scenario.source_hash == scenario.source_hash:
                    st.success(f"✅ 运行完成: {len(result.records)} 条停滞记录")
                    if result.undecided:
                        st.warning(f"⚠️ 当前规模下无法判定: {', '.join(result.undecided)}")
                    display_synergy_results(result)
                    display_stuckness(result)
                    display_reports(result)

    with tab2:
        display_diagram_demo()

    with tab3:
        display_run_archive()


if __name__ == "__main__":
    main()
