"""Registry of acceptance-criterion verdicts, printed at the end of a pytest run."""

LINES: dict[int, str] = {}


def record(index: int, title: str, ok: bool, detail: str) -> str:
    line = f"[{'PASS' if ok else 'FAIL'}] A{index:02d} {title}: {detail}"
    LINES[index] = line
    print(line)
    return line
