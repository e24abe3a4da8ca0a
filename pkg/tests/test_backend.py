import json
import math
import random
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from stylenlg.backend import (
    BackendError,
    Candidate,
    GenerationRequest,
    MockBackend,
    NgramFluency,
    NoiseSpec,
    RateLimitError,
    RemoteCompletionBackend,
    SidecarFluency,
    constant_fluency,
    mock_realize,
    truncate_at_stops,
)
from stylenlg.metrics import align_slots, sacc, ser
from stylenlg.mr import Personality, parse_personage_mr
from stylenlg.style import classify_local


class _ScriptedHandler(BaseHTTPRequestHandler):
    script = []  # list of (status, body-dict) consumed per request
    requests_seen = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length)) if length else {}
        type(self).requests_seen.append(body)
        status, payload = (
            self.script.pop(0) if self.script else (200, {"completions": []})
        )
        encoded = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(encoded)))
        self.end_headers()
        self.wfile.write(encoded)

    def log_message(self, *args):
        pass


@pytest.fixture
def scripted_server():
    server = HTTPServer(("127.0.0.1", 0), _ScriptedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _ScriptedHandler.script = []
    _ScriptedHandler.requests_seen = []
    yield f"http://127.0.0.1:{server.server_port}", _ScriptedHandler
    server.shutdown()


class TestGenerationRequest:
    def test_defaults_match_published_settings(self):
        request = GenerationRequest(prompt="p")
        assert request.n == 10
        assert request.temperature == 0.7
        assert request.top_p == 1.0

    @pytest.mark.parametrize(
        "kwargs", [{"n": 0}, {"temperature": -0.1}, {"top_p": 0.0}, {"top_p": 1.5}]
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            GenerationRequest(prompt="p", **kwargs)


class TestTruncation:
    def test_stop_sequence_applied(self):
        assert truncate_at_stops("hello} world", ("}",)) == "hello"

    def test_earliest_stop_wins(self):
        assert truncate_at_stops("a\n\nb}c", ("}", "\n\n")) == "a"

    def test_idempotent(self):
        once = truncate_at_stops("some text } tail", ("}",))
        assert truncate_at_stops(once, ("}",)) == once


class TestRemoteBackend:
    def test_n_candidates(self, scripted_server):
        url, handler = scripted_server
        handler.script = [(200, {"completions": [f"text {i}}}" for i in range(3)]})]
        backend = RemoteCompletionBackend(url, backoff=0.0)
        request = GenerationRequest(prompt="p", n=3, stop_sequences=("}",))
        candidates = backend.generate(request, prompt_id="7")
        assert len(candidates) == 3
        assert [c.text for c in candidates] == ["text 0", "text 1", "text 2"]
        assert all(c.prompt_id == "7" for c in candidates)
        assert [c.index for c in candidates] == [0, 1, 2]

    def test_request_body_contract(self, scripted_server):
        url, handler = scripted_server
        handler.script = [(200, {"completions": ["x"]})]
        backend = RemoteCompletionBackend(url, backoff=0.0)
        backend.generate(GenerationRequest(prompt="the prompt", n=1, stop_sequences=("}",)))
        body = handler.requests_seen[0]
        assert body["prompt"] == "the prompt"
        assert body["n"] == 1
        assert body["temperature"] == 0.7
        assert body["top_p"] == 1.0
        assert body["stop"] == ["}"]

    def test_rate_limit_retries_then_succeeds(self, scripted_server):
        url, handler = scripted_server
        handler.script = [(429, {}), (429, {}), (200, {"completions": ["ok"]})]
        backend = RemoteCompletionBackend(url, max_retries=3, backoff=0.0)
        candidates = backend.generate(GenerationRequest(prompt="p", n=1))
        assert candidates[0].text == "ok"

    def test_rate_limit_cap_surfaces(self, scripted_server):
        url, handler = scripted_server
        handler.script = [(429, {})] * 4
        backend = RemoteCompletionBackend(url, max_retries=2, backoff=0.0)
        with pytest.raises(RateLimitError):
            backend.generate(GenerationRequest(prompt="p", n=1))

    def test_transport_error(self):
        backend = RemoteCompletionBackend("http://127.0.0.1:1", backoff=0.0, timeout=0.2)
        with pytest.raises(BackendError):
            backend.generate(GenerationRequest(prompt="p", n=1))

    def test_malformed_response(self, scripted_server):
        url, handler = scripted_server
        handler.script = [(200, {"nope": True})]
        backend = RemoteCompletionBackend(url, backoff=0.0)
        with pytest.raises(BackendError):
            backend.generate(GenerationRequest(prompt="p", n=1))

    def test_wrong_count_rejected(self, scripted_server):
        url, handler = scripted_server
        handler.script = [(200, {"completions": ["only one"]})]
        backend = RemoteCompletionBackend(url, backoff=0.0)
        with pytest.raises(BackendError):
            backend.generate(GenerationRequest(prompt="p", n=2))

    def test_empty_completion_kept(self, scripted_server):
        url, handler = scripted_server
        handler.script = [(200, {"completions": ["", "b"]})]
        backend = RemoteCompletionBackend(url, backoff=0.0)
        candidates = backend.generate(GenerationRequest(prompt="p", n=2))
        assert candidates[0].text == ""


class TestMockRealize:
    def test_zero_noise_is_perfect_and_styled(self, restaurant_mr):
        for p in Personality:
            text = mock_realize(
                restaurant_mr, p, NoiseSpec(p_marker=1.0), random.Random(5)
            )
            alignment = align_slots(text, restaurant_mr)
            assert ser(alignment) == 0
            assert classify_local(text).argmax() is p

    def test_full_drop(self, restaurant_mr):
        text = mock_realize(
            restaurant_mr,
            Personality.AGREEABLE,
            NoiseSpec(p_drop=1.0, p_marker=0.0),
            random.Random(1),
        )
        assert ser(align_slots(text or " ", restaurant_mr)) == 1

    def test_hallucination_inserts_known_slots(self):
        mr = parse_personage_mr("name = nameVariable | food = English")
        rng = random.Random(3)
        text = mock_realize(
            mr, Personality.AGREEABLE, NoiseSpec(p_hallucinate=1.0, p_marker=0.0), rng
        )
        alignment = align_slots(text, mr)
        assert alignment.hallucinations >= 4  # every absent closed restaurant slot
        assert alignment.deletions == 0

    def test_substitution_scores_s(self, restaurant_mr):
        rng = random.Random(8)
        text = mock_realize(
            restaurant_mr,
            Personality.AGREEABLE,
            NoiseSpec(p_substitute=1.0, p_marker=0.0),
            rng,
        )
        alignment = align_slots(text, restaurant_mr)
        assert alignment.substitutions >= 4
        assert sacc(alignment) < 1

    def test_noise_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec(p_drop=1.2)
        with pytest.raises(ValueError):
            NoiseSpec(p_drop=0.8, p_substitute=0.5)


class TestMockBackend:
    def test_candidate_count(self, restaurant_mr):
        backend = MockBackend(NoiseSpec(p_drop=0.3), seed=1)
        pool = backend.generate_for_mr(restaurant_mr, Personality.AGREEABLE, 10, 42)
        assert len(pool) == 10
        assert [c.index for c in pool] == list(range(10))

    def test_deterministic_per_seed(self, restaurant_mr):
        backend = MockBackend(NoiseSpec(p_drop=0.3), seed=1)
        a = backend.generate_for_mr(restaurant_mr, Personality.AGREEABLE, 5, 42)
        b = backend.generate_for_mr(restaurant_mr, Personality.AGREEABLE, 5, 42)
        assert [c.text for c in a] == [c.text for c in b]

    def test_item_seed_varies_output(self, restaurant_mr):
        backend = MockBackend(NoiseSpec(p_drop=0.5), seed=1)
        a = backend.generate_for_mr(restaurant_mr, Personality.AGREEABLE, 5, 1)
        b = backend.generate_for_mr(restaurant_mr, Personality.AGREEABLE, 5, 2)
        assert [c.text for c in a] != [c.text for c in b]


class TestFluency:
    def test_range_contract(self):
        model = NgramFluency().train(["the pub is in city centre", "the pub is cheap"])
        for text in ("the pub is cheap", "zebra quantum flux", "the the the"):
            score = model(text)
            assert 0 < score <= 1

    def test_deterministic(self):
        model = NgramFluency().train(["a b c d", "b c d e"])
        assert model("a b c") == model("a b c")

    def test_corpus_sentence_beats_character_shuffle(self):
        corpus = [
            "nameVariable is a family friendly pub in city centre",
            "it serves English food and it is cheap",
            "nameVariable is near nearVariable and it is expensive",
        ]
        model = NgramFluency().train(corpus)
        sentence = "nameVariable is a cheap pub in city centre"
        rng = random.Random(17)
        chars = list(sentence.replace(" ", ""))
        rng.shuffle(chars)
        shuffled = " ".join(
            "".join(chars[i : i + 5]) for i in range(0, len(chars), 5)
        )
        assert model(sentence) > model(shuffled)
        # Cross-check against the model's own likelihood computation.
        assert model(sentence) == pytest.approx(math.exp(model.mean_logprob(sentence)))

    def test_empty_rejected(self):
        model = NgramFluency().train(["a b"])
        with pytest.raises(ValueError):
            model("")

    def test_constant_provider(self):
        fluency = constant_fluency(0.25)
        assert fluency("anything") == 0.25
        with pytest.raises(ValueError):
            constant_fluency(0.0)

    def test_sidecar_provider_exponentiates(self):
        class FakeClient:
            def logprob(self, texts):
                return [-1.0 for _ in texts]

        fluency = SidecarFluency(FakeClient())
        assert fluency("text") == pytest.approx(math.exp(-1.0))
