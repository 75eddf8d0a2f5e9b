import sys

from tqdm import tqdm

import config


def status(message: str):
    """Progress line on stderr, shown only in verbose mode"""
    if config.VERBOSE:
        tqdm.write(f"🔄 {message}", file=sys.stderr)


def done(message: str):
    if config.VERBOSE:
        tqdm.write(f"✅ {message}", file=sys.stderr)


def warn(message: str):
    tqdm.write(f"⚠️  {message}", file=sys.stderr)


def fail(message: str):
    tqdm.write(f"❌ {message}", file=sys.stderr)


def progress(iterable, total=None, desc=None):
    """tqdm bar on stderr; silent unless verbose"""
    return tqdm(iterable, total=total, desc=desc, file=sys.stderr, disable=not config.VERBOSE)
