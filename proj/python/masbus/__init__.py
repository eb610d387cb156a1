"""Python access to the masbus core.

Terms, URIs and route files go through as text; scenario configs and
reports are JSON text at the C++ boundary and dicts here.
"""

import json

from ._masbus import (
    MasbusError,
    ScenarioTimeout,
    canonical_term,
    format_uri,
    haversine_km,
    parse_routes_xml,
    parse_uri,
    render_routes_xml,
)
from . import _masbus

__all__ = [
    "MasbusError",
    "ScenarioTimeout",
    "assert_report",
    "canonical_term",
    "default_config",
    "format_uri",
    "haversine_km",
    "parse_routes_xml",
    "parse_uri",
    "render_routes_xml",
    "report_fingerprint",
    "run_scenario",
]


def _text(value):
    return value if isinstance(value, str) else json.dumps(value)


def default_config():
    return json.loads(_masbus.default_config_json())


def run_scenario(config, simulated_time=True):
    """Runs the factory scenario; returns the report as a dict.

    ScenarioTimeout carries the partial report as JSON text in `.report`.
    """
    return json.loads(_masbus.run_scenario(_text(config), simulated_time))


def assert_report(report, config):
    return _masbus.assert_report(_text(report), _text(config))


def report_fingerprint(report):
    return _masbus.report_fingerprint(_text(report))
