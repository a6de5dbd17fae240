import plotly.graph_objs as go
import plotly.subplots as sp

from models.hypergraph import format_fraction


def create_empty_chart(message):
    """
    创建空图表显示提示信息
    """
    fig = go.Figure()
    fig.add_annotation(
        text=message,
        xref="paper", yref="paper",
        x=0.5, y=0.5, showarrow=False,
        font=dict(size=16)
    )
    fig.update_layout(
        xaxis=dict(showgrid=False, showticklabels=False, zeroline=False),
        yaxis=dict(showgrid=False, showticklabels=False, zeroline=False),
        plot_bgcolor='white'
    )
    return fig


def generate_synergy_chart(report):
    """单元概率柱状图 + 单元权重折线"""
    if report is None:
        return create_empty_chart("没有协同分析结果")
    cells = [str(cell) for cell in report.cells]

    fig = sp.make_subplots(
        rows=2, cols=1,
        subplot_titles=('各单元停滞实例概率', '单元权重与停滞 (情境, 时刻) 数'),
        shared_xaxes=True,
        vertical_spacing=0.12
    )
    fig.add_trace(
        go.Bar(x=cells,
               y=[float(p) for p in report.probabilities],
               name='Prob',
               marker_color='steelblue'),
        row=1, col=1
    )
    fig.add_trace(
        go.Scatter(x=cells,
                   y=[float(w) for w in report.weights],
                   mode='lines+markers',
                   name='权重',
                   line=dict(color='orange')),
        row=2, col=1
    )
    fig.add_trace(
        go.Bar(x=cells,
               y=[len(pairs) for pairs in report.stuck_sets],
               name='停滞对数',
               marker_color='gray',
               opacity=0.5),
        row=2, col=1
    )
    fig.update_layout(
        height=700,
        title_text=f"cog-syn[{' | '.join(report.processes)}] = {format_fraction(report.value)}"
    )
    fig.update_xaxes(title_text="停滞度单元", row=2, col=1)
    fig.update_yaxes(title_text="概率", row=1, col=1)
    return fig


def generate_stuckness_timeline(result, situation):
    """某情境中各过程停滞度随时刻的变化"""
    records = [r for r in result.records if r.situation == situation]
    if not records:
        return create_empty_chart(f"情境 {situation} 没有停滞记录")
    processes = sorted(records[0].degrees)

    fig = go.Figure()
    for process in processes:
        fig.add_trace(
            go.Scatter(x=[r.tick for r in records],
                       y=[float(r.degrees[process]) for r in records],
                       mode='lines+markers',
                       name=process)
        )
    fig.update_layout(height=450, title_text=f"{situation} 停滞度时间线",
                      xaxis_title="时刻", yaxis_title="stuck", yaxis=dict(range=[0, 1.05]))
    return fig


def gnuplot_series(result):
    """
    生成 gnuplot 可直接读取的空白分隔数据

    Returns:
        文件名 → 文本；每个协同报告一个 synergy-*.dat，每个情境一个 stuck-*.dat
    """
    series = {}
    for report in result.synergy:
        lines = [f"# cell_lower cell_upper weight probability  cog_syn={format_fraction(report.value)}"]
        for cell, weight, probability in zip(report.cells, report.weights, report.probabilities):
            lines.append(f"{float(cell.lower):.6f} {float(cell.upper):.6f} "
                         f"{float(weight):.6f} {float(probability):.6f}")
        series[f"synergy-{'-'.join(report.processes)}.dat"] = "\n".join(lines) + "\n"

    by_situation = {}
    for record in result.records:
        by_situation.setdefault(record.situation, []).append(record)
    for situation, records in sorted(by_situation.items()):
        processes = sorted(records[0].degrees)
        lines = ["# tick " + " ".join(processes)]
        for record in records:
            lines.append(f"{record.tick} " + " ".join(f"{float(record.degrees[p]):.6f}" for p in processes))
        series[f"stuck-{situation}.dat"] = "\n".join(lines) + "\n"
    return series
