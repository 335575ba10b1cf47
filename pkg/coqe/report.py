from __future__ import annotations
import json
from dataclasses import dataclass, field
from typing import Optional
from .geometry import RIEMANN_SIGN
from .package import ReportPackage
from .verdict import Verdict
from .version import __version__

FORMATS = ('text', 'json', 'msgpack')

CONVENTIONS = {
    'riemann_sign': RIEMANN_SIGN,
    'trace': ['plain', 'metric'],
}

EXIT_OK, EXIT_FAIL, EXIT_INPUT = range(3)


@dataclass
class CheckResult:
    name: str
    verdict: Verdict
    residuals: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    error: Optional[str] = None

    def to_dict(self) -> dict:
        notes = list(self.notes)
        if self.error:
            notes.insert(0, self.error)
        return {
            'name': self.name,
            'verdict': self.verdict.value,
            'residuals': self.residuals,
            'notes': notes,
        }


@dataclass
class Report:
    manifest: str
    checks: list[CheckResult] = field(default_factory=list)
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            'version': self.version,
            'conventions': CONVENTIONS,
            'checks': [c.to_dict() for c in self.checks],
        }

    def count(self, verdict: Verdict) -> int:
        return sum(c.verdict is verdict for c in self.checks)

    @property
    def exit_code(self) -> int:
        return EXIT_FAIL if self.count(Verdict.FAIL) else EXIT_OK


def _render_text(report: Report) -> str:
    lines = [
        f'coqe {report.version}; manifest: {report.manifest}',
        f'conventions: {CONVENTIONS["riemann_sign"]}; '
        f'traces: {", ".join(CONVENTIONS["trace"])}',
    ]
    for c in report.checks:
        d = c.to_dict()
        lines.append(f'[{d["verdict"]}] {c.name}')
        for note in d['notes']:
            lines.append(f'    {note}')
        for r in d['residuals']:
            idx = ','.join(str(i) for i in r['indices'])
            lines.append(f'    residual ({idx}): {r["expr"]}')
    lines.append(
        f'{len(report.checks)} checks: '
        f'{report.count(Verdict.PASS)} pass, '
        f'{report.count(Verdict.FLAGGED)} flagged, '
        f'{report.count(Verdict.FAIL)} fail')
    lines.append(f'exit code: {report.exit_code}')
    return '\n'.join(lines) + '\n'


def emit_report(report: Report, fmt: str = 'text') -> bytes:
    fmt = fmt.lower()
    if fmt == 'text':
        return _render_text(report).encode()
    if fmt == 'json':
        return (json.dumps(report.to_dict(), indent=2) + '\n').encode()
    if fmt == 'msgpack':
        return ReportPackage.make(
            ReportPackage.TP_REPORT, report.to_dict()).to_bytes()
    raise ValueError(
        f'unknown report format `{fmt}`; must be one of {", ".join(FORMATS)}')
