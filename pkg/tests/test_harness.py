import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import httpx
import pytest

from structeval.harness import (BackendError, BackendKind, ConfigError, HttpChatBackend, RunConfig, corrupt,
                                make_backend, prompt_hash, read_results, record_cassette, run_pipeline,
                                score_sample, write_results)
from structeval.harness.backends import load_cassette, split_prompt
from structeval.ir import leaves
from structeval.parsers import serialize
from structeval.values import Empty


# -- a local chat-completions stub ---------------------------------------------

class ChatStub:
    """Serves canned replies; ``script`` lists (status, content) pairs that
    are consumed before falling back to echoing the oracle answer."""

    def __init__(self, answers):
        self.answers = answers  # user message -> reply text
        self.script = []
        self.requests = []
        self.lock = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                with stub.lock:
                    stub.requests.append((self.path, dict(self.headers), body))
                    status, content = stub.script.pop(0) if stub.script else (200, None)
                if content is None:
                    content = stub.answers.get(body["messages"][-1]["content"], "no idea")
                payload = json.dumps({"choices": [{"message": {"role": "assistant", "content": content}}]})
                data = payload.encode() if status == 200 else b"busy"
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}/v1"
        threading.Thread(target=self.server.serve_forever, daemon=True).start()

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def stub(small_corpus):
    answers = {split_prompt(s.prompt)[-1]["content"]: serialize(s.format, s.ir) for s in small_corpus}
    server = ChatStub(answers)
    yield server
    server.close()


def http_config(stub, **kw):
    return RunConfig(backend=BackendKind.HTTP_CHAT, endpoint=stub.url, model="stub-model",
                     backoff=0.0, retries=2, timeout=5, **kw)


# -- synthetic backends ------------------------------------------------------------

def test_oracle_is_perfect(small_corpus):
    records = run_pipeline(small_corpus, RunConfig(backend=BackendKind.ORACLE))
    assert [r.sample_id for r in records] == sorted(s.id for s in small_corpus)
    for r in records:
        assert r.status == "OK"
        assert r.csa == 1.0 and r.nted == 1.0
        assert r.backend["model"] == "oracle"


def test_corruptor_at_zero_equals_oracle(small_corpus):
    oracle = run_pipeline(small_corpus, RunConfig(backend=BackendKind.ORACLE))
    zero = run_pipeline(small_corpus, RunConfig(backend=BackendKind.CORRUPTOR, corruption_rate=0.0))
    assert [r.raw_output for r in oracle] == [r.raw_output for r in zero]


def test_corrupt_full_rate_replaces_every_leaf(small_corpus):
    for s in small_corpus:
        if s.format.track.value != "STRUCTURE":
            continue
        damaged = corrupt(s.ir, 1.0, 5)
        # empty containers are structure, not values, and stay put
        before = {(tuple(p), v) for p, v in leaves(s.ir) if not isinstance(v.value, Empty)}
        after = {(tuple(p), v) for p, v in leaves(damaged)}
        assert not before & after, s.id


def test_corrupt_is_deterministic(small_corpus):
    for s in small_corpus:
        assert corrupt(s.ir, 0.3, (1, s.seed)) == corrupt(s.ir, 0.3, (1, s.seed))
        assert corrupt(s.ir, 0.0, 9) is s.ir


def test_corruptor_runs_are_reproducible(small_corpus):
    cfg = RunConfig(backend=BackendKind.CORRUPTOR, corruption_rate=0.3, corruption_seed=4)
    a, b = run_pipeline(small_corpus, cfg), run_pipeline(small_corpus, cfg)
    assert [r.to_json() for r in a] == [r.to_json() for r in b]


def test_sample_scores_do_not_depend_on_corpus_order(small_corpus):
    cfg = RunConfig(backend=BackendKind.CORRUPTOR, corruption_rate=0.5, corruption_seed=2)
    shuffled = list(small_corpus)
    random.Random(3).shuffle(shuffled)
    a = run_pipeline(small_corpus, cfg)
    b = run_pipeline(shuffled, cfg)
    c = run_pipeline(small_corpus[::3], cfg)
    assert [r.to_json() for r in a] == [r.to_json() for r in b]
    by_id = {r.sample_id: r.to_json() for r in a}
    assert all(by_id[r.sample_id] == r.to_json() for r in c)


def test_unparseable_output_is_bottom(small_corpus):
    s = small_corpus[0]
    rec = score_sample(s, "I cannot do that.")
    assert rec.status == "BOTTOM" and rec.csa == 0.0 and rec.nted == 0.0
    assert rec.backend["diagnostics"]
    good = score_sample(s, "Sure!\n```\n" + s.raw + "\n```")
    assert good.status == "OK" and good.csa == 1.0


def test_duplicate_ids_rejected(small_corpus):
    with pytest.raises(ValueError):
        run_pipeline([small_corpus[0], small_corpus[0]], RunConfig())


def test_results_round_trip(tmp_path, small_corpus):
    records = run_pipeline(small_corpus[:10], RunConfig(backend=BackendKind.CORRUPTOR, corruption_rate=0.1))
    path = tmp_path / "r.jsonl"
    write_results(records, path)
    assert read_results(path) == records


# -- cassettes ---------------------------------------------------------------------

def test_record_then_replay(tmp_path, stub, small_corpus):
    cassette = tmp_path / "c.jsonl"
    assert record_cassette(small_corpus, http_config(stub), cassette) == {}
    again = tmp_path / "c2.jsonl"
    record_cassette(small_corpus, http_config(stub), again)
    assert cassette.read_bytes() == again.read_bytes()
    lines = cassette.read_text().splitlines()
    assert len(lines) == len(small_corpus)
    assert [json.loads(x)["prompt_hash"] for x in lines] == sorted(json.loads(x)["prompt_hash"] for x in lines)

    replay = RunConfig(backend=BackendKind.REPLAY, cassette=str(cassette))
    first, second = run_pipeline(small_corpus, replay), run_pipeline(small_corpus, replay)
    assert [r.to_json() for r in first] == [r.to_json() for r in second]
    assert all(r.status == "OK" and r.csa == 1.0 for r in first)


def test_cassette_miss_is_bottom(tmp_path, small_corpus):
    s = small_corpus[0]
    cassette = tmp_path / "c.jsonl"
    cassette.write_text(json.dumps({"prompt_hash": prompt_hash(s.prompt), "response": s.raw}) + "\n")
    records = run_pipeline(small_corpus[:3], RunConfig(backend=BackendKind.REPLAY, cassette=str(cassette)))
    by_id = {r.sample_id: r for r in records}
    assert by_id[s.id].status == "OK"
    misses = [r for r in records if r.sample_id != s.id]
    assert misses and all(r.status == "BOTTOM" and r.backend["error"] == "cassette miss" for r in misses)


def test_malformed_cassette(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json}\n")
    with pytest.raises(ConfigError, match="bad.jsonl:1"):
        load_cassette(bad)
    with pytest.raises(ConfigError):
        load_cassette(tmp_path / "missing.jsonl")


# -- HTTP backend --------------------------------------------------------------------

def test_http_request_shape(stub, small_corpus, monkeypatch):
    monkeypatch.setenv("STRUCTEVAL_API_KEY", "sekrit")
    s = small_corpus[0]
    backend = HttpChatBackend(http_config(stub, temperature=0.0, max_tokens=77))
    try:
        reply = backend.generate(s)
    finally:
        backend.close()
    assert reply.text == serialize(s.format, s.ir)
    path, headers, body = stub.requests[0]
    assert path == "/v1/chat/completions"
    assert headers["Authorization"] == "Bearer sekrit"
    assert body["model"] == "stub-model" and body["temperature"] == 0.0 and body["max_tokens"] == 77
    assert [m["role"] for m in body["messages"]] == ["system", "user"]
    assert body["messages"][0]["content"] + "\n" + body["messages"][1]["content"] == s.prompt


def test_http_retries_overload_then_succeeds(stub, small_corpus):
    stub.script = [(503, None), (429, None)]
    backend = HttpChatBackend(http_config(stub))
    try:
        reply = backend.generate(small_corpus[0])
    finally:
        backend.close()
    assert reply.meta["attempts"] == 3
    assert len(stub.requests) == 3


def test_http_gives_up_and_run_records_bottom(stub, small_corpus):
    stub.script = [(503, None)] * 3
    records = run_pipeline(small_corpus[:1], http_config(stub))
    assert records[0].status == "BOTTOM"
    assert "giving up after 3 attempts" in records[0].backend["error"]


def test_http_does_not_retry_bad_content(stub, small_corpus):
    stub.script = [(200, "definitely not a table")]
    records = run_pipeline(small_corpus[:1], http_config(stub))
    assert len(stub.requests) == 1
    assert records[0].status == "BOTTOM"
    assert records[0].raw_output == "definitely not a table"


def test_http_client_error_not_retried(stub, small_corpus):
    stub.script = [(400, None)]
    backend = HttpChatBackend(http_config(stub))
    with pytest.raises(BackendError, match="HTTP 400"):
        backend.generate(small_corpus[0])
    backend.close()
    assert len(stub.requests) == 1


def test_http_retries_transport_errors(small_corpus):
    calls = []
    body = {"choices": [{"message": {"content": "ok"}}]}

    def handler(request):
        calls.append(request)
        if len(calls) < 3:
            raise httpx.ConnectError("refused", request=request)
        return httpx.Response(200, json=body)

    cfg = RunConfig(backend="HTTP_CHAT", endpoint="http://x.invalid", model="m", retries=3, backoff=0.5)
    backend = HttpChatBackend(cfg, transport=httpx.MockTransport(handler))
    sleeps = []
    backend._sleep = sleeps.append
    assert backend.complete("hi").text == "ok"
    assert sleeps == [0.5, 1.0]


def test_unreachable_endpoint_yields_bottom_records(small_corpus):
    def handler(request):
        raise httpx.ConnectError("refused", request=request)

    cfg = RunConfig(backend=BackendKind.HTTP_CHAT, endpoint="http://x.invalid", model="m", retries=1, backoff=0.0)
    backend = HttpChatBackend(cfg, transport=httpx.MockTransport(handler))
    records = run_pipeline(small_corpus[:4], cfg, backend=backend)
    assert all(r.status == "BOTTOM" and "ConnectError" in r.backend["error"] for r in records)


def test_config_errors_raise_before_requests(tmp_path):
    with pytest.raises(ConfigError):
        make_backend(RunConfig(backend=BackendKind.HTTP_CHAT, model="m"))
    with pytest.raises(ConfigError):
        make_backend(RunConfig(backend=BackendKind.HTTP_CHAT, endpoint="http://x"))
    with pytest.raises(ConfigError):
        make_backend(RunConfig(backend=BackendKind.REPLAY))
    with pytest.raises(ConfigError):
        make_backend(RunConfig(backend=BackendKind.REPLAY, cassette=str(tmp_path / "nope.jsonl")))
    with pytest.raises(ConfigError):
        RunConfig(corruption_rate=1.5)
    with pytest.raises(ValueError):
        RunConfig(backend="SOMETHING")


def test_model_labels():
    assert RunConfig(backend=BackendKind.CORRUPTOR, corruption_rate=0.3).model_label == "corruptor-0.3"
    assert RunConfig(backend=BackendKind.HTTP_CHAT, model="gpt-x").model_label == "gpt-x"
    assert RunConfig(label="mine").model_label == "mine"
