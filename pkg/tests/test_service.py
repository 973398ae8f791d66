"""HTTP service behavior and CLI parity."""

import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest

from stmtkit.modelio import ModelBundle, classify_text, load_model
from stmtkit.service import MAX_BODY_BYTES, make_server


@pytest.fixture(scope="module")
def bundle(corpus_dataset, vector_file, tmp_path_factory):
    from stmtkit.cli import main

    path = tmp_path_factory.mktemp("svc") / "model.bin"
    code = main(
        [
            "train",
            "--dataset",
            str(corpus_dataset),
            "--vectors",
            str(vector_file),
            "--model",
            str(path),
            "--kind",
            "logreg-embedded",
            "--window",
            "64",
            "--epochs",
            "3",
            "--batch-size",
            "8",
            "--ratio",
            "1.0",
            "--validation-fraction",
            "0.2",
        ]
    )
    assert code == 0
    return load_model(path)


@pytest.fixture()
def server(bundle):
    srv = make_server(bundle, "127.0.0.1", 0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()
    thread.join(timeout=5)


def post(server, body: bytes, headers=None):
    port = server.server_address[1]
    request = urllib.request.Request(
        f"http://127.0.0.1:{port}/",
        data=body,
        headers=headers or {},
        method="POST",
    )
    with urllib.request.urlopen(request, timeout=10) as response:
        return response.status, response.read(), response.headers.get("Content-Type")


SAMPLE = b"Assume the sequence converges to a finite limit.\n"


class TestResponses:
    def test_json_response_shape(self, server, bundle):
        status, body, content_type = post(server, SAMPLE)
        assert status == 200
        assert content_type == "application/json"
        payload = json.loads(body)
        assert set(payload) == {"label", "probs", "tokens"}
        assert payload["label"] in bundle.classes
        assert len(payload["probs"]) == 13
        assert abs(sum(payload["probs"]) - 1.0) < 1e-6
        assert payload["tokens"] == 8

    def test_parity_with_direct_classification(self, server, bundle):
        status, body, _ = post(server, SAMPLE)
        payload = json.loads(body)
        label, probs, token_count = classify_text(bundle, SAMPLE.decode())
        assert payload["label"] == label
        assert payload["tokens"] == token_count
        np.testing.assert_allclose(payload["probs"], probs, atol=1e-12)

    def test_plain_text_negotiation(self, server):
        status, body, content_type = post(
            server, SAMPLE, headers={"Accept": "text/plain"}
        )
        assert status == 200
        assert content_type.startswith("text/plain")
        lines = body.decode().splitlines()
        assert lines[0].startswith("label=")
        assert sum(1 for l in lines if l.startswith("prob.")) == 13

    def test_stateless_repeat_requests_agree(self, server):
        first = json.loads(post(server, SAMPLE)[1])
        second = json.loads(post(server, SAMPLE)[1])
        assert first == second


class TestErrors:
    def test_empty_body_is_400(self, server):
        with pytest.raises(urllib.error.HTTPError) as err:
            post(server, b"   ")
        assert err.value.code == 400

    def test_oversize_body_is_413(self, server):
        body = b"x" * (MAX_BODY_BYTES + 1)
        with pytest.raises(urllib.error.HTTPError) as err:
            post(server, body)
        assert err.value.code == 413

    def test_get_is_405(self, server):
        port = server.server_address[1]
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(f"http://127.0.0.1:{port}/", timeout=10)
        assert err.value.code == 405

    def test_model_failure_is_opaque_500(self, bundle):
        broken = ModelBundle(
            kind="logreg-embedded",
            window=64,
            classes=bundle.classes,
            params=bundle.params,
            vocab=None,
        )
        srv = make_server(broken, "127.0.0.1", 0)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        try:
            with pytest.raises(urllib.error.HTTPError) as err:
                post(srv, SAMPLE)
            assert err.value.code == 500
            assert json.loads(err.value.read()) == {"error": "internal error"}
        finally:
            srv.shutdown()
            srv.server_close()
            thread.join(timeout=5)


class TestShutdownHook:
    def test_max_requests_stops_server(self, bundle):
        srv = make_server(bundle, "127.0.0.1", 0, max_requests=2)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        post(srv, SAMPLE)
        post(srv, SAMPLE)
        thread.join(timeout=5)
        assert not thread.is_alive()
        assert srv.requests_served == 2
        srv.server_close()
