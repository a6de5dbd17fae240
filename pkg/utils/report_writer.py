"""
报告输出与复现校验
输出目录中的每个文件都先写临时文件再原子替换；manifest.json 最后写入，
记录场景哈希、各情境种子、文件清单（sha256）和工具版本，不含时间戳。
"""

import hashlib
import io
import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass, field

import pandas as pd

from models.agent_simulation import dump_episode_log
from models.errors import ManifestError
from models.hypergraph import format_fraction

logger = logging.getLogger(__name__)

TOOL_VERSION = '1.0.0'
MANIFEST_NAME = 'manifest.json'
SCENARIO_COPY = 'scenario.toml'

# 没有清单时据此列出应当存在的文件
EXPECTED_FILES = (MANIFEST_NAME, SCENARIO_COPY, 'metrics.csv', 'states.csv', 'synergy.csv', 'synergy.txt')

METRIC_COLUMNS = ['situation', 'tick', 'process', 'conf', 'stuck', 'argmax_pattern', 'argmax_key',
                  'g', 'c_g', 'e', 'c_e', 'flagged']
SYNERGY_COLUMNS = ['processes', 'cell', 'weight', 'probability', 'stuck_pairs', 'cog_syn']
CENSUS_COLUMNS = ['process_a', 'process_b', 'n_hom', 'n_iso', 'ratio', 'pairs', 'truncated']


def atomic_write(path, data):
    """写入同目录下的临时文件后 os.replace，中途失败不会留下半个文件"""
    directory = os.path.dirname(path) or '.'
    os.makedirs(directory, exist_ok=True)
    if isinstance(data, str):
        data = data.encode('utf-8')
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-')
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(data)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


def _csv_text(rows, columns=None):
    df = pd.DataFrame(rows, columns=columns)
    return df.to_csv(index=False, lineterminator='\n')


# ---- 表格 ----

def synergy_rows(result):
    rows = []
    for report in result.synergy:
        for row in report.rows():
            rows.append({
                'processes': row['processes'],
                'cell': row['cell'],
                'weight': format_fraction(row['weight']),
                'probability': format_fraction(row['probability']),
                'stuck_pairs': row['stuck_pairs'],
                'cog_syn': format_fraction(report.value),
            })
    return rows


def census_rows(result):
    return [{
        'process_a': a,
        'process_b': b,
        'n_hom': record.n_hom,
        'n_iso': record.n_iso,
        'ratio': format_fraction(record.ratio),
        'pairs': record.pairs,
        'truncated': int(record.truncated),
    } for (a, b), record in result.census]


def report_frames(result):
    """报告中各张表的 DataFrame，供 CSV、xlsx 和仪表盘共用"""
    frames = {
        'metrics': pd.DataFrame(result.metrics_rows(), columns=METRIC_COLUMNS),
        'states': pd.DataFrame(result.state_rows()),
        'synergy': pd.DataFrame(synergy_rows(result), columns=SYNERGY_COLUMNS),
    }
    if result.census:
        frames['census'] = pd.DataFrame(census_rows(result), columns=CENSUS_COLUMNS)
    return frames


def synergy_text(result, overrides=None):
    scenario = result.scenario
    lines = [
        "# cognitive synergy report",
        f"tool_version: {TOOL_VERSION}",
        f"scenario: {scenario.name}",
        f"scenario_hash: {scenario.source_hash}",
        "seeds: " + ", ".join(f"{s}={seed}" for s, seed in sorted(result.seeds.items())),
    ]
    for key, value in sorted((overrides or {}).items()):
        lines.append(f"{key}: {value}")
    for report in result.synergy:
        lines.append("")
        lines.append(f"[{'|'.join(report.processes)}]")
        lines.append(f"functional: {report.functional}")
        lines.append(f"cog_syn: {format_fraction(report.value)}")
        lines.append("cell\tweight\tprobability\tstuck_pairs")
        for row in report.rows():
            lines.append(f"{row['cell']}\t{format_fraction(row['weight'])}\t"
                         f"{format_fraction(row['probability'])}\t{row['stuck_pairs']}")
    return "\n".join(lines) + "\n"


def metrics_text(result):
    lines = ["# conf / stuck per (situation, tick, process)"]
    for row in result.metrics_rows():
        lines.append(f"{row['situation']}@{row['tick']}\t{row['process']}\tconf={row['conf']}\t"
                     f"stuck={row['stuck']}\targmax={row['argmax_pattern']}")
    return "\n".join(lines) + "\n"


# ---- 输出目录 ----

@dataclass
class RunManifest:
    scenario: str
    scenario_hash: str
    seeds: dict
    files: dict
    overrides: dict = field(default_factory=dict)
    tool_version: str = TOOL_VERSION

    def to_json(self):
        payload = {
            'tool_version': self.tool_version,
            'scenario': self.scenario,
            'scenario_hash': self.scenario_hash,
            'seeds': self.seeds,
            'overrides': self.overrides,
            'files': self.files,
        }
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        return cls(payload['scenario'], payload['scenario_hash'], payload['seeds'], payload['files'],
                   payload.get('overrides', {}), payload.get('tool_version', TOOL_VERSION))


def write_reports(result, out_dir, scenario_text, overrides=None, gnuplot=None):
    """
    写出全部报告并生成清单

    Args:
        scenario_text: 场景原文，复制到输出目录以便复现
        overrides: 命令行覆盖项（seed、partition_cells、weights），写入清单
        gnuplot: 可选的 文件名 → 文本，写入 gnuplot/ 子目录

    Returns:
        RunManifest
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    outputs = {
        SCENARIO_COPY: scenario_text,
        'metrics.csv': _csv_text(result.metrics_rows(), METRIC_COLUMNS),
        'metrics.txt': metrics_text(result),
        'states.csv': _csv_text(result.state_rows()),
        'synergy.csv': _csv_text(synergy_rows(result), SYNERGY_COLUMNS),
        'synergy.txt': synergy_text(result, overrides),
    }
    if result.census:
        outputs['census.csv'] = _csv_text(census_rows(result), CENSUS_COLUMNS)
    for episode in result.store:
        outputs[f"episodes/{episode.situation}.log"] = dump_episode_log(episode.events)
    for name, text in sorted((gnuplot or {}).items()):
        outputs[f"gnuplot/{name}"] = text

    files = {}
    for relative, text in sorted(outputs.items()):
        path = os.path.join(out_dir, *relative.split('/'))
        atomic_write(path, text)
        files[relative] = file_sha256(path)

    manifest = RunManifest(result.scenario.name, result.scenario.source_hash,
                           dict(sorted(result.seeds.items())), files, overrides)
    atomic_write(os.path.join(out_dir, MANIFEST_NAME), manifest.to_json())
    print(f"✅ 报告已保存到: {out_dir}（{len(files)} 个文件）")
    return manifest


def export_workbook(result, target):
    """多工作表 xlsx；target 为路径或可写的二进制缓冲"""
    with pd.ExcelWriter(target, engine='openpyxl') as writer:
        for sheet_name, df in report_frames(result).items():
            df.to_excel(writer, sheet_name=sheet_name, index=False)
    return target


def workbook_bytes(result):
    buffer = io.BytesIO()
    export_workbook(result, buffer)
    return buffer.getvalue()


# ---- 校验 ----

@dataclass
class VerifyResult:
    ok: bool
    mismatched: list = field(default_factory=list)
    manifest: RunManifest = None


def _manifest_path(target):
    if os.path.isdir(target):
        return os.path.join(target, MANIFEST_NAME)
    return target


def load_manifest(target):
    path = _manifest_path(target)
    if not os.path.exists(path):
        directory = os.path.dirname(path) or '.'
        missing = [name for name in EXPECTED_FILES if not os.path.exists(os.path.join(directory, name))]
        raise ManifestError(f"找不到清单 {path}，缺少: {', '.join(missing)}", missing)
    with open(path, 'r', encoding='utf-8') as handle:
        text = handle.read()
    try:
        return RunManifest.from_json(text)
    except (ValueError, KeyError) as exc:
        raise ManifestError(f"清单无法解析: {path}", [MANIFEST_NAME]) from exc


def verify(target, rerun=False, jobs=1):
    """
    重新计算输出文件的哈希并与清单比对

    Args:
        target: 输出目录或其中的 manifest.json
        rerun: 为真时还会按清单重新执行场景，并逐文件比较新旧输出

    Returns:
        VerifyResult；ok 当且仅当所有文件逐字节一致

    Raises:
        ManifestError: 清单或清单中的文件缺失
    """
    manifest = load_manifest(target)
    directory = os.path.dirname(_manifest_path(target)) or '.'
    missing = [name for name in sorted(manifest.files)
               if not os.path.exists(os.path.join(directory, *name.split('/')))]
    if missing:
        raise ManifestError(f"输出文件缺失: {', '.join(missing)}", missing)

    mismatched = [name for name, digest in sorted(manifest.files.items())
                  if file_sha256(os.path.join(directory, *name.split('/'))) != digest]
    if not mismatched and rerun:
        mismatched = _rerun_mismatches(directory, manifest, jobs)
    for name in mismatched:
        logger.warning(f"❌ 文件与清单不一致: {name}")
    return VerifyResult(not mismatched, mismatched, manifest)


def _rerun_mismatches(directory, manifest, jobs):
    from utils.scenario_loader import parse_scenario
    from utils.scenario_runner import run_scenario
    from utils.visualization import gnuplot_series

    scenario_path = os.path.join(directory, SCENARIO_COPY)
    with open(scenario_path, 'r', encoding='utf-8') as handle:
        text = handle.read()
    scenario = parse_scenario(text, scenario_path)
    overrides = manifest.overrides
    result = run_scenario(scenario, seed=overrides.get('seed'), jobs=jobs,
                          partition_cells=overrides.get('partition_cells'), weights=overrides.get('weights'))
    emit = any(name.startswith('gnuplot/') for name in manifest.files)
    scratch = tempfile.mkdtemp(prefix='cogsyn-verify-')
    try:
        fresh = write_reports(result, scratch, text, overrides, gnuplot_series(result) if emit else None)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)
    names = sorted(set(manifest.files) | set(fresh.files))
    return [name for name in names if manifest.files.get(name) != fresh.files.get(name)]
