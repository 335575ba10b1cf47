import logging
import time
from typing import Optional, Sequence
from .checks import Session, ordered, run_check
from .exceptions import CheckException, FlaggedException
from .manifest import Manifest, validate_checks
from .report import CheckResult, Report
from .verdict import Verdict


class Runner:
    """Runs the checks of one manifest; results keep the requested order."""

    def __init__(self, manifest: Manifest, seed: int = 42):
        self.manifest = manifest
        self.session = Session(manifest, seed)

    def run(self, names: Optional[Sequence[str]] = None) -> Report:
        names = self.manifest.checks if names is None else \
            validate_checks(names, 'checks')
        results = {}
        for name in ordered(list(names)):
            results[name] = self._run_one(name)
        report = Report(self.manifest.name, [results[n] for n in names])
        flagged = report.count(Verdict.FLAGGED)
        if flagged:
            logging.warning(
                f'{flagged} check(s) flagged; manifest: {self.manifest.name}')
        return report

    def _run_one(self, name: str) -> CheckResult:
        ref = self.session.ref(name)
        ts = time.time()
        logging.debug(f'run check; {ref}')

        try:
            try:
                res = run_check(self.session, name)
                if not isinstance(res, dict):
                    raise TypeError(
                        'expecting type `dict` as check result '
                        f'but got type `{type(res).__name__}`')
            except CheckException:
                raise
            except Exception as e:
                # fall-back to exception class name
                error_msg = str(e) or type(e).__name__
                raise CheckException(error_msg)

        except FlaggedException as e:
            logging.warning(f'check flagged; {ref} error: `{e}`')
            out = CheckResult(name, Verdict.FLAGGED, error=str(e))
            res = e.result

        except CheckException as e:
            logging.error(
                'check error; '
                f'{ref} error: `{e}` verdict: {e.verdict.value}')
            out = CheckResult(name, e.verdict, error=str(e))
            res = e.result

        else:
            logging.debug(f'run check ok; {ref}')
            out = CheckResult(name, Verdict.PASS)

        if res:
            out.residuals = res.get('residuals', [])
            out.notes = res.get('notes', [])
        logging.debug(f'check done in {time.time() - ts:.3f}s; {ref}')
        return out


def run_checks(
        m: Manifest,
        names: Optional[Sequence[str]] = None,
        seed: int = 42) -> Report:
    return Runner(m, seed).run(names)
