import json
import sys

import click

from .errors import ExtractError
from .extract import ExtractionConfig, extract


@click.group()
def main():
    """Convert raw video clips into feature container directories."""


@main.command("extract")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path())
def extract_cmd(config_path, out_dir):
    """Extract features for every clip in the config; progress goes to
    stderr, the summary JSON to stdout."""
    try:
        config = ExtractionConfig.from_json_file(config_path,
                                                 output_root=out_dir)
        summary = extract(config)
    except (ExtractError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error [extract]: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(summary, indent=2))
    if summary["failed"]:
        sys.exit(2)


if __name__ == "__main__":
    main()
