from functools import lru_cache
from pathlib import Path
from typing import Any

from jinja2 import StrictUndefined, Template

TEMPLATES_DIR = Path(__file__).parent


@lru_cache(maxsize=8)
def load_template(name: str) -> str:
    template_file = TEMPLATES_DIR / f"{name}.md"
    if not template_file.exists():
        raise FileNotFoundError(f"Report template not found: {template_file}")

    return template_file.read_text()


def render_summary(
    reports: list[dict[str, Any]], significance: list[dict[str, Any]]
) -> str:
    template = Template(
        load_template("summary"),
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
    )
    return template.render(reports=reports, significance=significance)
