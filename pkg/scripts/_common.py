from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "results"


def save(report, stem):
    OUT.mkdir(exist_ok=True)
    (OUT / f"{stem}.json").write_text(report.to_json() + "\n", encoding="utf-8")
    if report.series:
        (OUT / f"{stem}.csv").write_text(report.series_csv(), encoding="utf-8")
    status = "passed" if report.passed else "FAILED " + ", ".join(report.failing())
    print(f"{stem}: {status} -> {OUT / stem}.json")
