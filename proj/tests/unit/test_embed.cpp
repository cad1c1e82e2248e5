#include "eba/embed.hpp"
#include "eba/error.hpp"
#include "fixtures.hpp"
#include "frozen_reference.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <thread>
#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

using namespace eba;
using namespace eba::embed;

namespace {

ErrorKind decode_kind(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_ebae(bytes);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InconsistentReport;
}

EmbeddingStore sample_store(std::size_t n, std::size_t dim) {
    TestProvider p(9, dim);
    EmbeddingStore s;
    for (std::size_t i = 0; i < n; ++i) s.add("img" + std::to_string(i), p.embed_image("img" + std::to_string(i), {}));
    s.add("text:a photo of clear water", p.embed_text("a photo of clear water"));
    return s;
}

double max_abs_diff(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) return 1.0;
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

double norm_of(const Embedding& e) {
    double ss = 0.0;
    for (double v : e.values) ss += v * v;
    return std::sqrt(ss);
}

// Loopback stand-in for the embedding sidecar.
struct MockSidecar {
    httplib::Server srv;
    int port = 0;
    std::thread th;
    std::atomic<int> active{0};
    std::atomic<int> peak{0};
    std::atomic<int> calls{0};
    int delay_ms = 0;
    int fail_status = 0;

    MockSidecar() {
        auto reply = [this](const std::string& key, httplib::Response& res) {
            const int now = ++active;
            int prev = peak.load();
            while (now > prev && !peak.compare_exchange_weak(prev, now)) {
            }
            ++calls;
            if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            --active;
            if (fail_status != 0) {
                res.status = fail_status;
                return;
            }
            TestProvider p(5, 16);
            const Embedding e = p.embed_text(key);
            nlohmann::json doc{{"dim", 16}, {"model", "mock-clip"}};
            doc["embedding"] = e.values;
            res.set_content(doc.dump(), "application/json");
        };
        srv.Post("/embed_text", [reply](const httplib::Request& req, httplib::Response& res) {
            reply(nlohmann::json::parse(req.body).at("text").get<std::string>(), res);
        });
        srv.Post("/embed_image", [reply](const httplib::Request& req, httplib::Response& res) {
            reply("bytes:" + std::to_string(req.body.size()) + ":" + req.get_header_value("Content-Type"), res);
        });
        srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"status":"ok","model":"mock-clip","dim":16})", "application/json");
        });
        port = srv.bind_to_any_port("127.0.0.1");
        th = std::thread([this] { srv.listen_after_bind(); });
        srv.wait_until_ready();
    }
    ~MockSidecar() {
        srv.stop();
        th.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_CASE("normalized and cosine") {
    const Embedding e = normalized({3.0, 4.0});
    CHECK(e.values[0] == doctest::Approx(0.6));
    CHECK(e.source_norm == doctest::Approx(5.0));
    CHECK_THROWS_AS(normalized({0.0, 0.0}), Error);
    CHECK_THROWS_AS(normalized({NAN, 1.0}), Error);

    const Embedding f = normalized({4.0, 3.0});
    CHECK(cosine(e, f) == cosine(f, e));
    CHECK(cosine(e, f) == doctest::Approx(0.96));
    CHECK(cosine(e, e) <= 1.0);
    CHECK_THROWS_AS(cosine(e, normalized({1.0, 0.0, 0.0})), Error);
}

TEST_CASE("clarity score is the clear-water softmax probability") {
    SimilarityProfile p;
    p.scores = {0.30, 0.25, 0.20, 0.20, 0.10};
    double denom = 0.0;
    for (double s : p.scores) denom += std::exp(100.0 * s);
    CHECK(clarity_score(p) == doctest::Approx(std::exp(30.0) / denom).epsilon(1e-12));

    std::copy(std::begin(frozen::kProfileRow), std::end(frozen::kProfileRow), p.scores.begin());
    CHECK(clarity_score(p) == doctest::Approx(frozen::kProfileClarity).epsilon(1e-12));

    p.scores = {1, 0, 0, 0, 0};
    CHECK(std::abs(clarity_score(p) - 1.0) <= 1e-12);

    p.scores = {0.2, 0.2, 0.2, 0.2, 0.2};
    CHECK(clarity_score(p) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("prompt strings follow the condition order") {
    const auto s = prompt_strings();
    CHECK(s[0] == "a photo of clear water");
    CHECK(s[3] == "a photo of deep-sea environment");
    CHECK(prompt_strings("an image of ")[4] == "an image of artificial lighting");
}

TEST_CASE("test provider is deterministic and seed dependent") {
    TestProvider a(1, 64), b(1, 64), c(2, 64);
    const auto x = a.embed_image("img7", "/nowhere.png");
    CHECK(x.values == b.embed_image("img7", "/elsewhere.png").values);
    CHECK(x.values != c.embed_image("img7", {}).values);
    CHECK(x.values != a.embed_text("img7").values);
    CHECK(norm_of(x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x.dim() == 64);
}

TEST_CASE("EBAE round trip is exact after float conversion") {
    const auto store = sample_store(6, 33);
    const auto bytes = encode_ebae(store);
    CHECK(bytes.size() == 12 + 7 * (2 + 33 * 4) + std::string("text:a photo of clear water").size() +
                              6 * std::string("img0").size());
    const auto back = decode_ebae(bytes);
    REQUIRE(back.size() == store.size());
    CHECK(back.ids() == store.ids());
    for (std::size_t r = 0; r < store.size(); ++r)
        for (std::size_t i = 0; i < 33; ++i)
            CHECK(back.items()[r].values[i] == static_cast<double>(static_cast<float>(store.items()[r].values[i])));
    CHECK(encode_ebae(back) == bytes);

    fx::TempDir dir;
    write_embeddings_file(store, dir / "e.ebae");
    CHECK(fx::read_file(dir / "e.ebae").size() == bytes.size());
    CHECK(load_embeddings_file(dir / "e.ebae").ids() == store.ids());
}

TEST_CASE("EBAE renormalizes vectors that are far from unit length") {
    EmbeddingStore s;
    Embedding raw;
    raw.values = {3.0, 4.0};
    s.add("x", raw);
    const auto back = decode_ebae(encode_ebae(s));
    CHECK(back.items()[0].values[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(back.items()[0].source_norm == doctest::Approx(5.0));
}

TEST_CASE("EBAE decode errors") {
    const auto good = encode_ebae(sample_store(2, 8));
    auto bad = good;
    bad[0] = 'X';
    CHECK(decode_kind(bad) == ErrorKind::BadMagic);
    CHECK(decode_kind({'E', 'B'}) == ErrorKind::BadMagic);

    auto version = good;
    version[4] = 2;
    CHECK(decode_kind(version) == ErrorKind::BadMagic);

    auto cut = good;
    cut.pop_back();
    CHECK(decode_kind(cut) == ErrorKind::TruncatedRecord);
    cut.resize(13);
    CHECK(decode_kind(cut) == ErrorKind::TruncatedRecord);

    EmbeddingStore zero;
    Embedding z;
    z.values = std::vector<double>(8, 0.0);
    zero.add("z", z);
    CHECK(decode_kind(encode_ebae(zero)) == ErrorKind::ZeroNormEmbedding);

    EmbeddingStore one;
    one.add("dup", normalized({1.0, 0.0}));
    auto twice = encode_ebae(one);
    const std::vector<std::uint8_t> record(twice.begin() + 12, twice.end());
    twice.insert(twice.end(), record.begin(), record.end());
    CHECK(decode_kind(twice) == ErrorKind::DuplicateId);

    fx::TempDir dir;
    CHECK_THROWS_AS(load_embeddings_file(dir / "none.ebae"), Error);
}

TEST_CASE("store rejects duplicate ids and mixed dimensions") {
    EmbeddingStore s;
    s.add("a", normalized({1.0, 0.0}));
    CHECK_THROWS_AS(s.add("a", normalized({0.0, 1.0})), Error);
    CHECK_THROWS_AS(s.add("b", normalized({1.0, 0.0, 0.0})), Error);
    CHECK(s.find("a") != nullptr);
    CHECK(s.find("b") == nullptr);
}

TEST_CASE("file provider serves images and prompt records") {
    FileProvider fp(sample_store(3, 8));
    CHECK(fp.embed_image("img1", {}).dim() == 8);
    CHECK(fp.embed_text("a photo of clear water").dim() == 8);
    try {
        fp.embed_text("a photo of murky water");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ProviderUnavailable);
    }
    CHECK_THROWS_AS(fp.embed_image("img9", {}), Error);
}

TEST_CASE("prompt set through a provider") {
    TestProvider p(3, 32);
    const auto set = make_prompt_set(p);
    CHECK(set.prompts[1] == "a photo of murky water");
    CHECK(set.prompt_embeddings[1].values == p.embed_text("a photo of murky water").values);
    const auto prof = similarity_profile(p.embed_image("x", {}), set);
    for (double s : prof.scores) CHECK(std::abs(s) <= 1.0);
}

TEST_CASE("parse_embed_response") {
    std::string model;
    const auto e = parse_embed_response(R"({"dim":2,"embedding":[0,2],"model":"m"})", &model);
    CHECK(e.values == std::vector<double>{0.0, 1.0});
    CHECK(model == "m");
    auto kind_of = [](const std::string& body) {
        try {
            parse_embed_response(body);
        } catch (const Error& err) {
            return err.kind();
        }
        return ErrorKind::InconsistentReport;
    };
    CHECK(kind_of("not json") == ErrorKind::ProviderUnavailable);
    CHECK(kind_of(R"({"vector":[1]})") == ErrorKind::ProviderUnavailable);
    CHECK(kind_of(R"({"embedding":[1,"x"]})") == ErrorKind::ProviderUnavailable);
    CHECK(kind_of(R"({"dim":3,"embedding":[1,0]})") == ErrorKind::DimMismatch);
    CHECK(kind_of(R"({"embedding":[0,0]})") == ErrorKind::ZeroNormEmbedding);
}

TEST_CASE("remote provider against a loopback sidecar") {
    MockSidecar mock;
    RemoteOptions opts;
    opts.base_url = mock.url();
    RemoteProvider rp(opts);

    CHECK(rp.health() == 16);
    CHECK(rp.model() == "mock-clip");

    const auto t = rp.embed_text("a photo of clear water");
    CHECK(max_abs_diff(t, TestProvider(5, 16).embed_text("a photo of clear water")) <= 1e-12);
    CHECK(norm_of(t) == doctest::Approx(1.0).epsilon(1e-12));

    fx::TempDir dir;
    eba::img::save_image(fx::random_u8_image(8, 8, 1), dir / "a.png");
    const auto size = fx::read_file(dir / "a.png").size();
    const auto i = rp.embed_image("a", dir / "a.png");
    CHECK(max_abs_diff(i, TestProvider(5, 16).embed_text("bytes:" + std::to_string(size) + ":image/png")) <= 1e-12);
    CHECK(rp.name() == "remote:" + mock.url());

    mock.fail_status = 500;
    try {
        rp.embed_text("x");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ProviderUnavailable);
        CHECK(std::string(e.what()).find("HTTP 500") != std::string::npos);
    }
}

TEST_CASE("remote provider bounds requests in flight") {
    MockSidecar mock;
    mock.delay_ms = 40;
    RemoteOptions opts;
    opts.base_url = mock.url();
    opts.max_in_flight = 2;
    RemoteProvider rp(opts);

    std::vector<std::thread> ts;
    for (int k = 0; k < 8; ++k) ts.emplace_back([&rp, k] { rp.embed_text("p" + std::to_string(k)); });
    for (auto& t : ts) t.join();
    CHECK(mock.calls == 8);
    CHECK(mock.peak <= 2);
    CHECK(mock.peak >= 1);
}

TEST_CASE("unreachable sidecar raises ProviderUnavailable") {
    // Bind without listening, then close: connections to the port are refused.
    int port = 0;
    {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        socklen_t len = sizeof addr;
        REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), len) == 0);
        REQUIRE(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
        port = ntohs(addr.sin_port);
        ::close(fd);
    }
    RemoteOptions opts;
    opts.base_url = "http://127.0.0.1:" + std::to_string(port);
    opts.connect_timeout = std::chrono::milliseconds(500);
    RemoteProvider rp(opts);
    for (auto call : {0, 1}) {
        try {
            if (call == 0) rp.health();
            else rp.embed_text("x");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ProviderUnavailable);
        }
    }
}
