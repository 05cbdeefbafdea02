"""``nibe`` command-line tool.

Exit codes: 0 success, 2 usage or format error, 3 cryptographic rejection,
4 internal error.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from collections import Counter

from . import abort_analysis, formats
from .bilinear import WIRE_TOY_PRIME, BackendId, CurveGroup, ToyGroup
from .errors import CryptoRejection, FormatError, InfeasibleEnumeration, NibeError
from .ibe import EncodedIdentity, HashId, SchemeConfig, encode_identity, keygen, setup
from .reduction import ToyDlogAdversary, eta_sample_count, lambda_bound, run_reduction

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CRYPTO = 3
EXIT_INTERNAL = 4

BACKENDS = {"toy": BackendId.TOY, "curve": BackendId.CURVE}


class UsageError(Exception):
    pass


def _require_toy_flag(backend_id, args):
    if backend_id == BackendId.TOY and not args.insecure_toy:
        raise UsageError("toy backend is insecure; pass --insecure-toy to use it")


def _load_params(path):
    return formats.load_params(formats.read_file(path))


def cmd_setup(args):
    backend = BACKENDS[args.backend]
    _require_toy_flag(backend, args)
    if args.oracle and backend != BackendId.TOY:
        raise UsageError("--oracle is a test feature and requires the toy backend")
    try:
        config = SchemeConfig(args.n, args.ell, HashId[args.hash.upper()])
        group = ToyGroup(WIRE_TOY_PRIME) if backend == BackendId.TOY else CurveGroup()
        config.check_group(group)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    params, master = setup(config, group, oracle=args.oracle)
    formats.write_atomic(args.params_out, formats.dump_params(params))
    formats.write_atomic(args.master_out, formats.dump_master(params, master), mode=0o600)
    print(f"wrote {params.element_count} group elements (n={config.n}, ell={config.ell}, n'={config.n_prime})")


def cmd_keygen(args):
    params = _load_params(args.params)
    _require_toy_flag(params.group.descriptor.backend_id, args)
    master = formats.load_master(formats.read_file(args.master), params)
    identity = args.identity.encode("utf-8")
    key = keygen(params, master, encode_identity(identity, params.config))
    formats.write_atomic(args.key_out, formats.dump_key(params, key, identity), mode=0o600)


def cmd_encrypt(args):
    params = _load_params(args.params)
    _require_toy_flag(params.group.descriptor.backend_id, args)
    payload = formats.read_file(args.infile)
    envelope = formats.seal(params, args.to.encode("utf-8"), payload)
    formats.write_atomic(args.out, envelope)


def cmd_decrypt(args):
    params = _load_params(args.params)
    _require_toy_flag(params.group.descriptor.backend_id, args)
    key, _ = formats.load_key(formats.read_file(args.key), params)
    plaintext = formats.open_envelope(params, key, formats.read_file(args.infile))
    formats.write_atomic(args.out, plaintext, mode=0o600)


# --------------------------------------------------------------------------
# analyze


def _lines(pairs) -> str:
    return "".join(f"{k}={v}\n" for k, v in pairs)


def analyze_sizes(n: int, ell: int, backend: str) -> str:
    group = CurveGroup() if backend == "curve" else ToyGroup(WIRE_TOY_PRIME)
    d = group.descriptor
    n_prime = n * ell
    elements = n + 4
    waters_elements = n_prime + 4
    header = 11
    file_bytes = header + elements * d.source_len + d.target_len
    return _lines(
        [
            ("mode", "sizes"),
            ("backend", backend),
            ("n", n),
            ("ell", ell),
            ("n_prime", n_prime),
            ("logical_elements", elements),
            ("waters_logical_elements", waters_elements),
            ("compression_factor", f"{waters_elements / elements:.4g}"),
            ("logical_element_bytes", d.logical_source_len),
            ("stored_element_bytes", d.source_len),
            ("params_logical_bytes", elements * d.logical_source_len),
            ("params_stored_bytes", elements * d.source_len),
            ("waters_params_logical_bytes", waters_elements * d.logical_source_len),
            ("waters_params_stored_bytes", waters_elements * d.source_len),
            ("params_file_bytes", file_bytes),
            # historical comparison: 1024-bit elements over F_p^2, 512-bit p
            ("historic_element_bits", 1024),
            ("historic_params_kbit", elements * 1024 // 1024),
            ("historic_waters_params_kbit", waters_elements * 1024 // 1024),
            ("historic_quoted_new_kb", 9),
            ("historic_quoted_waters_kb", 164),
            ("historic_quoted_new_kb_compressed", 4.5),
            ("historic_quoted_waters_kb_compressed", 82),
        ]
    )


def _random_identities(rng, count, ell, n):
    exp = abort_analysis.random_experiment(count - 1, ell, n, rng, trials=1)
    return [exp.v_star, *exp.queries]


def analyze_reduction(q, ell, n, trials, seed, toy_prime, eps=0.5) -> str:
    rng = random.Random(seed)
    config = SchemeConfig(n, ell)
    bound = 2 * q * (1 << ell) * n
    if toy_prime is None:
        toy_prime = 1009 if 1009 > bound else WIRE_TOY_PRIME
    group = ToyGroup(toy_prime)
    idents = _random_identities(rng, min(q + 1, (1 << ell) ** n), ell, n)
    v_star = EncodedIdentity(idents[0], ell)
    queries = [EncodedIdentity(v, ell) for v in idents[1 : q + 1]]
    adversary = ToyDlogAdversary(rng, v_star, queries)
    lam = lambda_bound(q, ell, n)
    samples = eta_sample_count(eps, lam)
    wins = 0
    aborts = Counter()
    for _ in range(trials):
        guess, tr = run_reduction(adversary, group, config, q, rng, eps=eps, eta_samples=samples)
        wins += guess == tr.beta
        aborts[tr.abort_kind.value] += 1
    rate = wins / trials
    sigma = (0.25 / trials) ** 0.5
    target = float(lam) * eps / 4
    return _lines(
        [
            ("mode", "reduction"),
            ("q", q),
            ("ell", ell),
            ("n", n),
            ("toy_p", toy_prime),
            ("seed", seed),
            ("games", trials),
            ("eta_samples", samples),
            ("lambda", lam),
            ("eps", eps),
            ("v_star", ",".join(map(str, v_star.v))),
            ("queries", ";".join(",".join(map(str, v.v)) for v in queries)),
            ("success_rate", f"{rate:.6f}"),
            ("advantage", f"{abs(rate - 0.5):.6f}"),
            ("sigma", f"{sigma:.6f}"),
            ("required_advantage", f"{target:.6f}"),
            *[(f"aborts_{k}", aborts.get(k, 0)) for k in ("none", "key-query", "challenge", "artificial")],
            ("pass", str(abs(rate - 0.5) >= target - 3 * sigma).lower()),
        ]
    )


def analyze_abort_bound(q, ell, n, trials, seed, experiments=1, exact=None) -> str:
    rng = random.Random(seed)
    out = []
    m = 2 * q
    if exact and not abort_analysis.exact_feasible(m, ell, n):
        raise InfeasibleEnumeration(
            f"exact enumeration needs {abort_analysis.state_space(m, ell, n)} points, limit is {abort_analysis.EXACT_LIMIT}"
        )
    for i in range(experiments):
        exp = abort_analysis.random_experiment(q, ell, n, rng, trials)
        report = abort_analysis.bound_check(exp, rng, exact=exact)
        out.append(f"mode=abort-bound\nexperiment={i}\nseed={seed}\n")
        out.append("v_star=" + ",".join(map(str, exp.v_star)) + "\n")
        out.append("queries=" + ";".join(",".join(map(str, v)) for v in exp.queries) + "\n")
        out.append(report.to_text())
    return "".join(out)


def analyze_lemma1(q, ell, n, m=None) -> str:
    m = m or 2 * q
    block_bound = min(1 << ell, max(m, 2))
    rows = abort_analysis.pairwise_survey(m, n, block_bound)
    coprime = [r for r in rows if r.coprime]
    deviating = [r for r in rows if not r.uniform]
    lines = [
        ("mode", "lemma1"),
        ("m", m),
        ("n", n),
        ("block_bound", block_bound),
        ("pairs", len(rows)),
        ("coprime_pairs", len(coprime)),
        ("coprime_pairs_exact", sum(r.uniform for r in coprime)),
        ("deviating_pairs", len(deviating)),
    ]
    for r in deviating:
        probs = sorted(set(r.probabilities.values()))
        lines.append(
            (
                "deviation",
                f"v={','.join(map(str, r.v))} v'={','.join(map(str, r.v_prime))} "
                f"coprime={str(r.coprime).lower()} values={'|'.join(map(str, probs))}",
            )
        )
    lines.append(("uniform_on_coprime_pairs", str(all(r.uniform for r in coprime)).lower()))
    return _lines(lines)


def cmd_analyze(args):
    try:
        if args.mode == "sizes":
            report = analyze_sizes(args.n, args.ell, args.backend)
        elif args.mode == "reduction":
            report = analyze_reduction(args.q, args.ell, args.n, args.trials, args.seed, args.toy_prime, args.eps)
        elif args.mode == "abort-bound":
            report = analyze_abort_bound(args.q, args.ell, args.n, args.trials, args.seed, args.experiments, args.exact or None)
        else:
            report = analyze_lemma1(args.q, args.ell, args.n, args.m)
    except InfeasibleEnumeration as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.report_out:
        formats.write_atomic(args.report_out, report.encode("utf-8"))
    else:
        sys.stdout.write(report)


# --------------------------------------------------------------------------


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    default_backend = os.environ.get("NIBE_BACKEND", "curve")
    if default_backend not in BACKENDS:
        default_backend = "curve"

    parser = argparse.ArgumentParser(prog="nibe", description="Identity-based encryption with compact public parameters.")
    sub = parser.add_subparsers(dest="command", required=True)

    def toy_flag(p):
        p.add_argument("--insecure-toy", action="store_true", help="allow the insecure toy backend")

    p = sub.add_parser("setup", help="generate public parameters and a master secret")
    p.add_argument("--n", type=_positive, required=True, help="number of identity blocks")
    p.add_argument("--ell", type=_positive, required=True, help="bits per block")
    p.add_argument("--backend", choices=sorted(BACKENDS), default=default_backend)
    p.add_argument("--hash", choices=[h.name.lower() for h in HashId], default="sha256")
    p.add_argument("--params-out", required=True)
    p.add_argument("--master-out", required=True)
    p.add_argument("--oracle", action="store_true", help="keep alpha in the master file (toy only)")
    toy_flag(p)
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("keygen", help="extract the private key of an identity")
    p.add_argument("--params", required=True)
    p.add_argument("--master", required=True)
    p.add_argument("--identity", required=True)
    p.add_argument("--key-out", required=True)
    toy_flag(p)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt a file to an identity")
    p.add_argument("--params", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    toy_flag(p)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt an envelope with a private key")
    p.add_argument("--params", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    toy_flag(p)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("analyze", help="run the reduction and abort-probability experiments")
    p.add_argument("--mode", choices=["reduction", "abort-bound", "lemma1", "sizes"], required=True)
    p.add_argument("--q", type=_positive, default=1)
    p.add_argument("--ell", type=_positive, default=1)
    p.add_argument("--n", type=_positive, default=1)
    p.add_argument("--trials", type=_positive, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report-out")
    p.add_argument("--backend", choices=sorted(BACKENDS), default=default_backend, help="sizes mode only")
    p.add_argument("--toy-prime", type=int, help="reduction mode: toy group order")
    p.add_argument("--eps", type=float, default=0.5, help="reduction mode: assumed adversary advantage")
    p.add_argument("--experiments", type=_positive, default=1, help="abort-bound mode: random identity sets")
    p.add_argument("--exact", action="store_true", help="abort-bound mode: insist on full enumeration")
    p.add_argument("--m", type=_positive, help="lemma1 mode: modulus (defaults to 2q)")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"nibe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CryptoRejection as exc:
        print(f"nibe: rejected ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_CRYPTO
    except FormatError as exc:
        print(f"nibe: bad input ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NibeError, OSError) as exc:
        print(f"nibe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"nibe: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
