"""Service configuration: one file (JSON), flag overrides on top.

Registration is closed by design; the account list is seeded from config
and defaults to the demo account. Transport security is left to a fronting
proxy; the service itself speaks plain HTTP.
"""

import json
from dataclasses import dataclass
from pathlib import Path

DEFAULT_ACCOUNT = ("EMBC", "EMBC2021")


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str
    port: int = 8432
    workers: int = 2
    accounts: tuple = (DEFAULT_ACCOUNT,)
    max_upload_bytes: int = 256 * 1024 * 1024
    token_ttl_seconds: float = 24 * 3600.0
    lease_seconds: float = 60.0
    demo_size: int = 256
    demo_seed: int = 1234
    ui_dir: str = None

    @classmethod
    def from_file(cls, path, **overrides) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text())
        accounts = raw.pop("accounts", None)
        if accounts is None and "account" in raw:
            acc = raw.pop("account")
            accounts = [acc]
        kwargs = dict(raw)
        if accounts is not None:
            kwargs["accounts"] = tuple(
                (a["username"], a["password"]) if isinstance(a, dict) else tuple(a)
                for a in accounts
            )
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)
