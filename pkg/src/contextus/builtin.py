"""Regenerate the bundled scenario files from the state-based pipeline.

Run ``python -m contextus.builtin`` after changing the model code; a test
checks that the shipped files match what this produces.
"""
from __future__ import annotations

from pathlib import Path

from .scenario import dumps_model, ghz_model, pr_box_model

DATA_DIR = Path(__file__).with_name("data")


def generated() -> dict[str, str]:
    return {
        "ghz.scenario.json": dumps_model(ghz_model()),
        "prbox.scenario.json": dumps_model(pr_box_model()),
    }


def write(directory: Path = DATA_DIR) -> list[Path]:
    out = []
    for name, text in generated().items():
        path = directory / name
        path.write_text(text, encoding="utf-8")
        out.append(path)
    return out


if __name__ == "__main__":
    for p in write():
        print(p)
