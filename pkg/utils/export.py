import dataclasses
import json
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd


def to_plain(obj: Any) -> Any:
    """Convert dataclasses / numpy values into JSON-ready Python objects"""
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_plain(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def to_json(obj: Any) -> str:
    # float repr is the shortest round-trip decimal, so re-parsing is exact
    return json.dumps(to_plain(obj), sort_keys=True, indent=2) + "\n"


def frame_to_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, lineterminator="\n")


def write_artifact(text: str, path: Optional[str] = None):
    """Write to the given path, or to stdout when no path is set"""
    if path in (None, "", "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
