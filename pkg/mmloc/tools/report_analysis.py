#!/usr/bin/env python3

import argparse
import sys

import numpy as np
import pandas as pd
import tabulate

from mmloc import ConfigError, load_report_json, reports_frame

# Sortable table, one row per report
html_code = """
<html>
<head>
    <link rel="stylesheet" href="https://cdn.datatables.net/1.13.4/css/jquery.dataTables.min.css">
    <script src="https://code.jquery.com/jquery-3.6.0.min.js"></script>
    <script src="https://cdn.datatables.net/1.13.4/js/jquery.dataTables.min.js"></script>
    <script>
        $(document).ready(function() {{
            $('#reports').DataTable({{ paging: false }});
        }});
    </script>
</head>
<body>
    <h2>{title}</h2>
    {html_table}
</body>
</html>
"""


def read_reports(paths: list[str]) -> pd.DataFrame:
    """
    Concatenate CSV and JSON reports written by ``mmloc simulate``.

    :raises ConfigError: unknown file type
    """
    frames = []
    for p in paths:
        if p.endswith(".csv"):
            frames.append(pd.read_csv(p))
        elif p.endswith(".json"):
            frames.append(reports_frame(load_report_json(p)))
        else:
            raise ConfigError(f"Unsupported report file {p}, expected .csv or .json")
    return pd.concat(frames, ignore_index=True)


def add_efficiency(df: pd.DataFrame) -> pd.DataFrame:
    """
    RMSE over CRLB for position and velocity, plus rho in dB.
    """
    df = df.copy()
    df["eff_u"] = df["rmse_u"] / df["crlb_pos"]
    df["eff_udot"] = df["rmse_udot"] / df["crlb_vel"]
    df["rho_db"] = 10.0 * np.log10(df["rho"].astype(float))
    return df


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Tabulate and compare mmloc Monte Carlo reports")
    parser.add_argument("--report", nargs="+", required=True, type=str, help="Report file(s) to analyze.")
    parser.add_argument("--query", type=str, help="Query to filter reports.", default=None)
    parser.add_argument("--sort", type=str, help="Column to sort by.", default=None)
    parser.add_argument("--efficiency", action="store_true", help="Add RMSE/CRLB columns.")
    parser.add_argument("--output", type=str, help="Output HTML file name.", default=None)
    parser.add_argument("--debug", action="store_true", help="Print each processing step.")
    args = parser.parse_args(argv)

    try:
        df = read_reports(args.report)
    except (ConfigError, OSError, ValueError) as e:
        print(f"report_analysis: {e}", file=sys.stderr)
        return 2

    if args.efficiency:
        df = add_efficiency(df)

    if args.query:
        if args.debug:
            print(f"Applying query: {args.query}")
        df = df.query(args.query)

    if args.sort:
        if args.debug:
            print(f"Sorting by column: {args.sort}")
        df = df.sort_values(by=args.sort)

    if args.output:
        if args.debug:
            print(f"Writing output to: {args.output}")
        html = html_code.format(title=args.query or "mmloc reports", html_table=df.to_html(index=False, table_id="reports"))
        with open(args.output, "w") as f:
            f.write(html)
    else:
        print(tabulate.tabulate(df.values.tolist(), headers=list(df.columns), tablefmt="grid"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
