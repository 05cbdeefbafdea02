"""Public-parameter sizes for the compressed scheme and for Waters' original."""

from nibe.cli import analyze_sizes

for n, ell in ((5, 32), (8, 32), (160, 1)):
    fields = dict(line.split("=", 1) for line in analyze_sizes(n, ell, "curve").splitlines())
    print(f"n={n:>3} ell={ell:>2}: {fields['logical_elements']:>3} elements, "
          f"{fields['params_stored_bytes']:>6} stored bytes "
          f"(Waters: {fields['waters_logical_elements']} elements)")
