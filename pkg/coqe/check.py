from typing import NamedTuple


class CheckRef(NamedTuple):
    manifest: str
    check: str

    def __repr__(self) -> str:
        return f"manifest: {self.manifest} check: {self.check}"


if __name__ == "__main__":
    ref = CheckRef('godel', 'classify')
    assert str(ref) == 'manifest: godel check: classify'
