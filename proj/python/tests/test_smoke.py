import json
import math

import pytest

import geoflood


def test_surface_matches_closed_form():
    r = 6371.0088
    want = r * r * math.radians(1.0) * (math.sin(math.radians(30.0)) - math.sin(math.radians(29.0)))
    assert geoflood.bbox_surface_km2(-96.0, 29.0, -95.0, 30.0) == pytest.approx(want, rel=1e-12)


def test_invalid_box_raises_with_code():
    with pytest.raises(geoflood.Error) as info:
        geoflood.bbox_surface_km2(-95.0, 29.0, -96.0, 30.0)
    assert info.value.args[0] == "validation_error"


def test_correlate_perfect_and_reference():
    rep = geoflood.correlate([1, 2, 3, 4], [2, 4, 6, 8])
    assert rep["pearson_r"] == 1.0
    assert rep["kendall_tau"] == 1.0
    scipy_stats = pytest.importorskip("scipy.stats")
    x = [0.3, 1.2, -0.5, 2.2, 0.9, 1.1, -1.4]
    y = [0.1, 0.8, -0.2, 1.5, 1.6, 0.4, -0.9]
    rep = geoflood.correlate(x, y)
    r, p = scipy_stats.pearsonr(x, y)
    assert rep["pearson_r"] == pytest.approx(r, abs=1e-12)
    assert rep["pearson_p"] == pytest.approx(p, abs=1e-10)


def test_embedding_is_unit_and_deterministic():
    v = geoflood.embed("flood water rising", dim=64)
    assert len(v) == 64
    assert math.fsum(x * x for x in v) == pytest.approx(1.0)
    assert v == geoflood.embed("flood water rising", dim=64)


def test_full_chain_and_api(tmp_path):
    raw = tmp_path / "raw.ndjson"
    raw.write_text("\n".join(geoflood.synthesize(2000, seed=3)) + "\n")
    fixture = tmp_path / "fixture.json"
    fixture.write_text(json.dumps(geoflood.geocoder_fixture(seed=3)))
    store = tmp_path / "store"

    assert geoflood.ingest(raw, store)["records"] == 2000
    geoflood.annotate(store, fixture)
    geoflood.postfilter(store)
    rep = geoflood.report(store)
    assert rep["tweets"] == 2000
    assert 0.0 < rep["usable_fraction"] < 1.0

    api = geoflood.Api(store)
    status, body, headers = api.get("/whatif", threshold=350)
    assert status == 200
    assert body["total_annotations"] == rep["annotations"]["kept"]["total"]
    assert headers["Content-Type"].startswith("application/json")
    status, scatter, _ = api.get("/scatter", kind="bbox")
    assert status == 200 and len(scatter) > 0
    status, body, _ = api.get("/scatter", kind="geotag")
    assert status == 400
    assert body["error"]["code"] == "request_error"
