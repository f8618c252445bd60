"""From a raw quote file to a normalized log-fluctuation series.

Public daily series such as FRED's DTB3 mark holidays with "." in place of a
value.  Those rows are dropped and returns are taken between the remaining
quotes, so a gap never produces a spurious zero return.
"""

import tempfile
from pathlib import Path

import numpy as np

from logfluct.ingest import log_returns, parse_quotes, read_returns_csv, returns_from_quotes, write_returns_csv

raw = """DATE,DTB3
1954-01-04,1.33
1954-01-05,1.28
1954-01-06,.
1954-01-07,1.30
1954-01-08,1.31
1954-01-11,1.27
"""

quotes = parse_quotes(raw)
print(f"{len(quotes)} quotes kept, {quotes.n_dropped} dropped")
print("raw log-fluctuations:", np.round(log_returns(quotes), 5))

# restrict to a window, then center and scale to unit standard deviation
series = returns_from_quotes(quotes.restrict("1954-01-05", None))
print("normalized:", np.round(series.values, 4))
print(f"mean {series.values.mean():.1e}, std {series.values.std():.12f}")
print("inverse map recovers the raw values:", np.allclose(series.raw(), log_returns(quotes.restrict("1954-01-05"))))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "returns.csv"
    write_returns_csv(series, path)
    print(path.read_text())
    print("read back", len(read_returns_csv(path)), "observations")
