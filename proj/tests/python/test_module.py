import json
import math

import pytest

import masbus


def test_uri_round_trip():
    u = masbus.parse_uri("mqtt : foo? host=tcp://broker & subscribeTopicName=latLong")
    assert u == {
        "scheme": "mqtt",
        "path": "foo",
        "params": [("host", "tcp://broker"), ("subscribeTopicName", "latLong")],
    }
    assert masbus.format_uri(u) == "mqtt:foo?host=tcp://broker&subscribeTopicName=latLong"


def test_errors_carry_codes():
    with pytest.raises(masbus.MasbusError) as info:
        masbus.parse_uri("no-scheme-here")
    assert info.value.code == "MissingScheme"

    with pytest.raises(masbus.MasbusError) as info:
        masbus.parse_routes_xml("<routes>\n  <route>\n    <from uri='a:b'/>\n  </route>\n</routes>")
    assert info.value.code == "MissingTo"
    assert info.value.line is not None


def test_terms():
    assert masbus.canonical_term("pos( -27.59 , 48.55 )") == "pos(-27.59,48.55)"
    with pytest.raises(masbus.MasbusError) as info:
        masbus.canonical_term("f(a,")
    assert info.value.code == "SyntaxError"
    assert info.value.position == 4


def test_haversine_one_degree_of_longitude_on_the_equator():
    assert masbus.haversine_km(0, 0, 0, 1) == pytest.approx(6371 * math.pi / 180, abs=1e-9)
    assert masbus.haversine_km(10, 20, 10, 20) == 0.0


def test_routes_round_trip():
    routes = [
        {
            "id": "tracking",
            "from": "mqtt:foo?host=tcp://broker&subscribeTopicName=latLong",
            "processors": [("set_header", "ArtifactName", "'TrackedArtifact'"), ("transform", "t1")],
            "to": ["artifact:cartago"],
        }
    ]
    assert masbus.parse_routes_xml(masbus.render_routes_xml(routes)) == routes


def test_scenario_default_run():
    cfg = masbus.default_config()
    report = masbus.run_scenario(cfg)
    assert [s["stage"] for s in report["stages"]] == ["i", "ii", "iii", "iv", "v"]
    assert report["winner_supplier"] == min(cfg["supplier_quotes"], key=lambda q: (q["price"], q["name"]))["name"]
    assert masbus.assert_report(report, cfg) == []
    again = masbus.run_scenario(json.dumps(cfg))
    assert masbus.report_fingerprint(report) == masbus.report_fingerprint(again)


def test_scenario_rejects_and_times_out():
    cfg = masbus.default_config()
    one = dict(cfg, supplier_quotes=cfg["supplier_quotes"][:1])
    with pytest.raises(masbus.MasbusError) as info:
        masbus.run_scenario(one)
    assert info.value.code == "InvalidConfig"

    far = dict(cfg, track_waypoints=[[46.0, 8.0], [46.1, 8.1]], stage_timeout_ms=5000)
    with pytest.raises(masbus.ScenarioTimeout) as info:
        masbus.run_scenario(far)
    assert info.value.code == "StageTimeout"
    partial = json.loads(info.value.report)
    assert [s["stage"] for s in partial["stages"]] == ["i", "ii", "iii", "iv"]
