"""Download the four Fashion-MNIST IDX files. The only networked code path."""

from __future__ import annotations

import gzip
import os
import urllib.request
from pathlib import Path

from ..data import FASHION_MNIST_FILES
from ..exceptions import FormatError

DEFAULT_BASE_URL = "http://fashion-mnist.s3-website.eu-central-1.amazonaws.com/"


def base_url() -> str:
    return os.environ.get("DDLAB_FASHION_MNIST_URL", DEFAULT_BASE_URL)


def fetch_fashion_mnist(data_dir, url=None, log=print) -> dict:
    """Fetch ``<stem>.gz`` for each file under ``url``, decompress into
    ``data_dir`` and check the uncompressed size. Files already present with
    the right size are skipped. Returns ``{key: path}``."""
    url = url or base_url()
    if not url.endswith("/"):
        url += "/"
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    out = {}
    for key, (stem, size) in FASHION_MNIST_FILES.items():
        dest = data_dir / stem
        if dest.exists() and dest.stat().st_size == size:
            log(f"{stem}: present")
            out[key] = dest
            continue
        src = url + stem + ".gz"
        log(f"{stem}: downloading {src}")
        with urllib.request.urlopen(src, timeout=60) as resp:
            packed = resp.read()
        try:
            payload = gzip.decompress(packed)
        except (OSError, EOFError) as exc:
            raise FormatError(f"{src} is not a valid gzip stream: {exc}") from exc
        if len(payload) != size:
            raise FormatError(f"{src}: expected {size} bytes after decompression, got {len(payload)}",
                              offset=min(len(payload), size))
        tmp = dest.with_suffix(".part")
        tmp.write_bytes(payload)
        tmp.replace(dest)
        out[key] = dest
    return out
