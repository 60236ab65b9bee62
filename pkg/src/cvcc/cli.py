"""Command-line entry point: ``cvcc run|search|register|vectors``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .config import load_config
from .crypto import TOY, canon, get_group, hash, hash_fields, schnorr_sign, stream_encrypt
from .crypto.cipher import keystream
from .errors import CvccError, ConfigError, InvalidGroup, MalformedUpload
from .metrics import DROP_ADVERSARY, DROP_OUT_OF_RANGE
from .netsim.engine import SimulationError, World
from .protocol import ra_init, register_vehicle
from .store import VcStore, owner_keys, trapdoor

log = logging.getLogger("cvcc")

EXIT_OK, EXIT_CONFIG, EXIT_INTERNAL = 0, 2, 3


def bundled_scenarios() -> list[str]:
    root = resources.files("cvcc") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_scenario(arg: str) -> Path:
    path = Path(arg)
    if path.exists() or arg not in bundled_scenarios():
        return path
    return Path(str(resources.files("cvcc") / "scenarios" / f"{arg}.json"))


def _check_accounting(report) -> None:
    f = report.frames
    total = f["accepted"] + sum(f["rejected"].values()) + f["dropped"][DROP_OUT_OF_RANGE] + f["dropped"][DROP_ADVERSARY]
    if total != f["generated"]:
        raise SimulationError(f"accounting mismatch: {total} outcomes for {f['generated']} frames")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_config(resolve_scenario(args.scenario))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not 0 <= args.seed < 2**64:
        print("config error: seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        world = World(config, args.seed).run()
        report = world.report()
        _check_accounting(report)
    except SimulationError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    world.trace.write(out / "trace.txt")
    (out / "report.json").write_text(report.to_json())
    if config.store.persist:
        stores = [n.store for n in world.nodes.values() if n.store is not None]
        if stores:
            stores[0].save(out / "store.bin")
        owners = {}
        for node in world.nodes.values():
            if node.owner_secret:
                dk, ks = owner_keys(node.owner_secret)
                owners[node.id] = {"pid": node.endpoint.pid.hex(), "data_key": dk.hex(), "k_search": ks.hex()}
        (out / "owners.json").write_text(json.dumps(owners, sort_keys=True, indent=2) + "\n")
    log.info("%s seed=%d: %d trace records -> %s", config.name, args.seed, len(world.trace), out)
    return EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    try:
        key = bytes.fromhex(args.key)
    except ValueError:
        key = b""
    if len(key) != 32:
        print("search key must be 64 hex characters", file=sys.stderr)
        return EXIT_CONFIG
    try:
        store = VcStore.load(args.store)
    except OSError as exc:
        print(f"cannot read store: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    except MalformedUpload as exc:
        print(f"corrupt store: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.keyword:
        print("keyword must be non-empty", file=sys.stderr)
        return EXIT_CONFIG
    for rid in store.search(trapdoor(key, args.keyword.encode())):
        print(rid.hex())
    return EXIT_OK


def cmd_register(args: argparse.Namespace) -> int:
    try:
        group = get_group(args.group)
        seed = bytes.fromhex(args.ra_seed)
        params = ra_init(seed, group)
        tpd = register_vehicle(params, args.id.encode(), args.password.encode(), args.expiry_ms,
                               fuzzy=args.fuzzy)
    except (InvalidGroup, ValueError, CvccError) as exc:
        print(f"registration failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    doc = {
        "group": args.group,
        "ra_public": params.ra_public.encode().hex(),
        "delta_ms": params.delta_ms,
        "pid": tpd.pid.hex(),
        "A": tpd.A.hex(),
        "B": tpd.B.hex(),
        "x_masked": tpd.x_masked.hex(),
        "fuzzy": tpd.fuzzy,
        "certificate": tpd.cert.encode().hex(),
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "tpd.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def crypto_vectors() -> dict:
    """Known-answer values for cross-implementation checks."""
    G = TOY.generator
    msg = b"cvcc test vector"
    sig = schnorr_sign(TOY, 3, msg, 5)
    key, nonce = hash(b"key"), hash(b"nonce")
    ct = stream_encrypt(key, nonce, b"attack at dawn")
    return {
        "sha256_empty": hash(b"").hex(),
        "sha256_abc": hash(b"abc").hex(),
        "canon_AB": canon([b"AB"]).hex(),
        "canon_A_B": canon([b"A", b"B"]).hex(),
        "toy_group": {"p": TOY.p, "q": TOY.order, "g": G.value,
                      "powers_of_g": [TOY.mul(G, k).value for k in range(TOY.order)]},
        "toy_schnorr": {"x": 3, "k": 5, "msg": msg.hex(), "R": sig.R.value, "s": sig.s,
                        "e": int.from_bytes(hash_fields("sig", sig.R.encode(), TOY.mul(G, 3).encode(), msg), "big") % TOY.order},
        "stream": {"key": key.hex(), "nonce": nonce.hex(), "pt": b"attack at dawn".hex(),
                   "keystream": keystream(key, nonce, 14).hex(), "body": ct.body.hex(), "tag": ct.tag.hex()},
    }


def cmd_vectors(args: argparse.Namespace) -> int:
    print(json.dumps(crypto_vectors(), sort_keys=True, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvcc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write trace.txt and report.json")
    p.add_argument("--scenario", required=True, help=f"scenario file, or one of: {', '.join(bundled_scenarios())}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("search", help="keyword search over a persisted store")
    p.add_argument("--store", required=True)
    p.add_argument("--key", required=True, help="owner search key, hex")
    p.add_argument("--keyword", required=True)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("register", help="emit TPD and certificate fixtures for one vehicle")
    p.add_argument("--id", required=True)
    p.add_argument("--password", required=True)
    p.add_argument("--ra-seed", default="00" * 32, help="RA seed, hex")
    p.add_argument("--group", default="toy", choices=["toy", "standard-curve"])
    p.add_argument("--expiry-ms", type=int, default=86_400_000)
    p.add_argument("--fuzzy", action="store_true", help="store a truncated login verifier")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("vectors", help="print crypto test vectors")
    p.set_defaults(func=cmd_vectors)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
