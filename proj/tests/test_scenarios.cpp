#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vranfair/rng.hpp"
#include "vranfair/scenarios.hpp"

using namespace vranfair;

namespace {

ScenarioSpec spec_of(ScenarioKind kind, long horizon, std::uint64_t seed) {
    ScenarioSpec spec;
    spec.kind = kind;
    spec.horizon = horizon;
    spec.seed = seed;
    return spec;
}

bool same_assignment(const AssignmentEnv& a, const AssignmentEnv& b) {
    return a.lambda == b.lambda && a.n == b.n && a.snr == b.snr && a.prices == b.prices &&
           a.capacity == b.capacity && a.phi_h == b.phi_h;
}

bool same_mintb(const MinTbEnv& a, const MinTbEnv& b) {
    return a.b == b.b && a.rho == b.rho && a.snr == b.snr && a.phi == b.phi;
}

} // namespace

TEST_CASE("kind names round-trip") {
    for (ScenarioKind kind : {ScenarioKind::kAssignment1, ScenarioKind::kAssignment2, ScenarioKind::kMinTb1,
                              ScenarioKind::kMinTb2Trace, ScenarioKind::kMinTb3, ScenarioKind::kCustomFile})
        CHECK(scenario_kind_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(scenario_kind_from_string("assignment"), std::invalid_argument);
}

TEST_CASE("defaults resolve per kind") {
    ScenarioSpec a1 = resolve_defaults(spec_of(ScenarioKind::kAssignment1, 10, 1));
    CHECK(a1.num_entities == 5);
    CHECK(a1.num_servers == 4);
    CHECK(a1.snr_db.lo == 10.0);
    CHECK(a1.snr_db.hi == 30.0);

    ScenarioSpec m1 = resolve_defaults(spec_of(ScenarioKind::kMinTb1, 10, 1));
    CHECK(m1.num_entities == 10);
    CHECK(m1.snr_db.lo == 20.0);
    CHECK(m1.snr_db.hi == 30.0);

    ScenarioSpec m3 = resolve_defaults(spec_of(ScenarioKind::kMinTb3, 10, 1));
    CHECK(m3.num_entities == 5);

    // explicit choices survive resolution
    ScenarioSpec custom = spec_of(ScenarioKind::kAssignment1, 10, 1);
    custom.num_entities = 3;
    custom.num_servers = 2;
    custom.snr_db = Bounds{5.0, 6.0};
    ScenarioSpec kept = resolve_defaults(custom);
    CHECK(kept.num_entities == 3);
    CHECK(kept.num_servers == 2);
    CHECK(kept.snr_db.lo == 5.0);
    CHECK(kept.snr_db.hi == 6.0);
}

TEST_CASE("spec validation rejects bad knobs") {
    CHECK_THROWS_AS(make_envs(spec_of(ScenarioKind::kAssignment1, 0, 1)), std::invalid_argument);

    ScenarioSpec bad = spec_of(ScenarioKind::kAssignment1, 5, 1);
    bad.lambda_bytes = Bounds{6e6, 4e6}; // reversed
    CHECK_THROWS_AS(make_envs(bad), std::invalid_argument);

    bad = spec_of(ScenarioKind::kMinTb1, 5, 1);
    bad.phi = -1.0;
    CHECK_THROWS_AS(make_envs(bad), std::invalid_argument);

    bad = spec_of(ScenarioKind::kMinTb3, 5, 1);
    bad.num_entities = 6;
    CHECK_THROWS_WITH_AS(make_envs(bad), doctest::Contains("ping-pong"), std::invalid_argument);

    bad = spec_of(ScenarioKind::kCustomFile, 5, 1);
    CHECK_THROWS_WITH_AS(make_envs(bad), doctest::Contains("trace_path"), std::invalid_argument);

    bad = spec_of(ScenarioKind::kMinTb1, 5, 1);
    bad.rho_scales = {1.0, -2.0};
    CHECK_THROWS_AS(make_envs(bad), std::invalid_argument);
}

TEST_CASE("stationary assignment draws stay inside their supports") {
    EnvSequence seq = make_envs(spec_of(ScenarioKind::kAssignment1, 200, 7));
    CHECK(seq.is_assignment());
    CHECK(seq.horizon() == 200);
    CHECK(seq.note == "iid-uniform");
    for (const AssignmentEnv& env : seq.assignment) {
        REQUIRE(env.num_vbs() == 5);
        REQUIRE(env.num_servers() == 4);
        CHECK(env.phi_h == 1.0);
        for (int i = 0; i < 5; ++i) {
            CHECK(env.lambda[i] >= 4e6);
            CHECK(env.lambda[i] < 6e6);
            CHECK(env.n[i] >= 4e4);
            CHECK(env.n[i] < 6e4);
            CHECK(env.snr[i] >= 10.0);
            CHECK(env.snr[i] < 30.0);
        }
        for (int j = 0; j < 4; ++j) {
            CHECK(env.prices[j] >= 10.0);
            CHECK(env.prices[j] < 15.0);
            CHECK(env.capacity[j] > 0.0);
            CHECK(env.capacity[j] < 10.0);
        }
        env.validate();
    }
    // the synthetic fleet alternates CPU-like and accelerator profiles
    CHECK(seq.assignment[0].profiles[0].id == "cpu0");
    CHECK(seq.assignment[0].profiles[1].id == "ha1");
    CHECK(seq.assignment[0].profiles[2].id == "cpu2");
    CHECK(seq.assignment[0].profiles[3].id == "ha3");
    CHECK(seq.assignment[0].profiles[1].kind == ServerKind::kHa);
}

TEST_CASE("generation is bit-identical across calls") {
    for (ScenarioKind kind : {ScenarioKind::kAssignment1, ScenarioKind::kAssignment2}) {
        EnvSequence a = make_envs(spec_of(kind, 50, 42));
        EnvSequence b = make_envs(spec_of(kind, 50, 42));
        for (long t = 0; t < 50; ++t) CHECK(same_assignment(a.assignment[t], b.assignment[t]));
    }
    for (ScenarioKind kind : {ScenarioKind::kMinTb1, ScenarioKind::kMinTb2Trace, ScenarioKind::kMinTb3}) {
        EnvSequence a = make_envs(spec_of(kind, 50, 42));
        EnvSequence b = make_envs(spec_of(kind, 50, 42));
        for (long t = 0; t < 50; ++t) CHECK(same_mintb(a.mintb[t], b.mintb[t]));
    }
    // different seeds decorrelate
    EnvSequence a = make_envs(spec_of(ScenarioKind::kAssignment1, 5, 1));
    EnvSequence b = make_envs(spec_of(ScenarioKind::kAssignment1, 5, 2));
    CHECK_FALSE(same_assignment(a.assignment[0], b.assignment[0]));
}

TEST_CASE("every stationary draw comes from its own keyed stream") {
    const std::uint64_t seed = 99;
    EnvSequence seq = make_envs(spec_of(ScenarioKind::kAssignment1, 20, seed));
    for (long t = 1; t <= 20; ++t) {
        const AssignmentEnv& env = seq.assignment[t - 1];
        for (int i = 0; i < 5; ++i) {
            CHECK(env.lambda[i] == stream_for(seed, 1, t, i, field::kArrival).uniform(4e6, 6e6));
            CHECK(env.n[i] == stream_for(seed, 1, t, i, field::kBlockSize).uniform(4e4, 6e4));
            CHECK(env.snr[i] == stream_for(seed, 1, t, i, field::kSnr).uniform(10.0, 30.0));
        }
        for (int j = 0; j < 4; ++j) {
            CHECK(env.prices[j] == stream_for(seed, 1, t, j, field::kPrice).uniform(10.0, 15.0));
            CHECK(env.capacity[j] ==
                  std::max(1e-9, stream_for(seed, 1, t, j, field::kCapacity).uniform(0.0, 10.0)));
        }
    }

    EnvSequence batch = make_envs(spec_of(ScenarioKind::kMinTb1, 20, seed));
    for (long t = 1; t <= 20; ++t) {
        const MinTbEnv& env = batch.mintb[t - 1];
        for (int i = 0; i < 10; ++i) {
            CHECK(env.b[i] == stream_for(seed, 3, t, i, field::kArrival).uniform(10.0, 40.0));
            CHECK(env.rho[i] == stream_for(seed, 3, t, i, field::kBlockSize).uniform(5e4, 1e5));
            CHECK(env.snr[i] == stream_for(seed, 3, t, i, field::kSnr).uniform(20.0, 30.0));
        }
    }
}

TEST_CASE("arrival draws average to the support midpoint") {
    ScenarioSpec spec = spec_of(ScenarioKind::kAssignment1, 10000, 3);
    spec.num_entities = 1;
    spec.num_servers = 1;
    EnvSequence seq = make_envs(spec);
    double mean = 0.0;
    for (const AssignmentEnv& env : seq.assignment) mean += env.lambda[0];
    mean /= 10000.0;
    CHECK(std::abs(mean - 5e6) < 0.01 * 5e6);
}

TEST_CASE("periodic scenario reconstructs from means, vanishing noise, and a sine") {
    const std::uint64_t seed = 17;
    ScenarioSpec spec = spec_of(ScenarioKind::kAssignment2, 300, seed);
    EnvSequence seq = make_envs(spec);
    CHECK(seq.note == "periodic-capacity");
    const double period = std::sqrt(300.0);

    for (int i = 0; i < 5; ++i) {
        const double mean_lambda = stream_for(seed, 2, 0, i, field::kArrival).uniform(4e6, 6e6);
        const double mean_n = stream_for(seed, 2, 0, i, field::kBlockSize).uniform(4e4, 6e4);
        const double mean_s = stream_for(seed, 2, 0, i, field::kSnr).uniform(10.0, 30.0);
        for (long t = 1; t <= 300; ++t) {
            const AssignmentEnv& env = seq.assignment[t - 1];
            const double nl = stream_for(seed, 2, t, i, field::kArrival).normal();
            CHECK(env.lambda[i] == std::max(0.0, mean_lambda * (1.0 + 0.1 * nl / t)));
            const double nn = stream_for(seed, 2, t, i, field::kBlockSize).normal();
            CHECK(env.n[i] == std::max(1e-6, mean_n * (1.0 + 0.1 * nn / t)));
            const double ns = stream_for(seed, 2, t, i, field::kSnr).normal();
            CHECK(env.snr[i] == mean_s * (1.0 + 0.1 * ns / t));
        }
    }
    for (int j = 0; j < 4; ++j) {
        const double mean_p = stream_for(seed, 2, 0, j, field::kPrice).uniform(10.0, 15.0);
        const double mean_c = stream_for(seed, 2, 0, j, field::kCapacity).uniform(0.0, 10.0);
        for (long t = 1; t <= 300; ++t) {
            const AssignmentEnv& env = seq.assignment[t - 1];
            const double np = stream_for(seed, 2, t, j, field::kPrice).normal();
            CHECK(env.prices[j] == std::max(1e-6, mean_p * (1.0 + 0.1 * 0.1 * np / t)));
            const double swing = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
            CHECK(env.capacity[j] == std::max(1e-9, mean_c * (1.0 + 0.5 * swing)));
        }
    }
}

TEST_CASE("periodic capacity autocorrelates at the square-root period") {
    ScenarioSpec spec = spec_of(ScenarioKind::kAssignment2, 4096, 11);
    spec.num_entities = 1;
    spec.num_servers = 1;
    EnvSequence seq = make_envs(spec);

    std::vector<double> c;
    for (const AssignmentEnv& env : seq.assignment) c.push_back(env.capacity[0]);
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= static_cast<double>(c.size());
    for (double& v : c) v -= mean;

    int best_lag = 0;
    double best = -1e300;
    for (int lag = 32; lag <= 100; ++lag) {
        double r = 0.0;
        for (size_t t = 0; t + lag < c.size(); ++t) r += c[t] * c[t + lag];
        if (r > best) {
            best = r;
            best_lag = lag;
        }
    }
    CHECK(best_lag >= 61); // sqrt(4096) = 64
    CHECK(best_lag <= 67);
}

TEST_CASE("periodic noise budget grows logarithmically, not linearly") {
    ScenarioSpec spec = spec_of(ScenarioKind::kAssignment2, 4000, 23);
    spec.num_entities = 1;
    spec.num_servers = 1;
    EnvSequence seq = make_envs(spec);
    const double mean_lambda = stream_for(23, 2, 0, 0, field::kArrival).uniform(4e6, 6e6);

    double s1000 = 0.0, s2000 = 0.0, s4000 = 0.0;
    for (long t = 1; t <= 4000; ++t) {
        const double dev = std::abs(seq.assignment[t - 1].lambda[0] - mean_lambda);
        if (t <= 1000) s1000 += dev;
        if (t <= 2000) s2000 += dev;
        s4000 += dev;
    }
    // Sum of |noise|/t over a dyadic window is ~log 2 regardless of the window,
    // so consecutive increments match; a linear budget would double instead.
    const double inc1 = s2000 - s1000;
    const double inc2 = s4000 - s2000;
    CHECK(inc2 / inc1 > 0.8);
    CHECK(inc2 / inc1 < 1.25);
    // and the total is a vanishing fraction of a linear drift budget
    CHECK(s4000 < 0.01 * 4000.0 * 0.1 * mean_lambda);
}

TEST_CASE("ping-pong congruences follow the documented periods") {
    EnvSequence seq = make_envs(spec_of(ScenarioKind::kMinTb3, 64, 5));
    CHECK(seq.note == "ping-pong");
    for (long t = 1; t <= 64; ++t) {
        const MinTbEnv& env = seq.mintb[t - 1];
        // user 1: events alternate every slot, starting busy at t = 1
        CHECK(env.b[0] == (t % 2 == 1 ? 40.0 : 10.0));
        // user 2: period 4
        CHECK(env.b[1] == (t % 4 < 2 ? 10.0 : 40.0));
        // user 3: period 8
        CHECK(env.b[2] == (t % 8 < 4 ? 10.0 : 40.0));
        // user 5: period 32
        CHECK(env.b[4] == (t % 32 < 16 ? 10.0 : 40.0));
        // SNR periods shrink with the user index: user 1 flips every 8 slots
        CHECK(env.snr[0] == (t % 16 < 8 ? 20.0 : 30.0));
        // user 4 alternates every slot
        CHECK(env.snr[3] == (t % 2 < 1 ? 20.0 : 30.0));
        // user 5's half-period is below one slot, so its SNR is constant
        CHECK(env.snr[4] == 20.0);
    }

    // block sizes are the per-user mean plus a 1/t-damped Gaussian
    for (int i = 0; i < 5; ++i) {
        const double mean_rho = stream_for(5, 5, 0, i, field::kBlockSize).uniform(5e4, 1e5);
        for (long t = 1; t <= 64; ++t) {
            const double noise = stream_for(5, 5, t, i, field::kBlockSize).normal();
            CHECK(seq.mintb[t - 1].rho[i] == std::max(1e-6, mean_rho + 1e4 * noise / t));
        }
    }
}

TEST_CASE("synthetic bursts stay in range and are reproducible") {
    ScenarioSpec spec = spec_of(ScenarioKind::kMinTb2Trace, 100, 31);
    EnvSequence seq = make_envs(spec);
    CHECK(seq.note == "synthetic-burst");
    CHECK(seq.horizon() == 100);
    int low = 0, high = 0;
    for (const MinTbEnv& env : seq.mintb) {
        env.validate();
        for (int i = 0; i < env.num_users(); ++i) {
            const bool quiet = env.b[i] >= 10.0 && env.b[i] <= 15.0;
            const bool busy = env.b[i] >= 30.0 && env.b[i] <= 40.0;
            CHECK((quiet || busy));
            (busy ? high : low) += 1;
            CHECK(env.snr[i] >= 20.0);
            CHECK(env.snr[i] <= 30.0);
            CHECK(env.rho[i] > 0.0);
        }
    }
    CHECK(low > 0); // both burst phases appear
    CHECK(high > 0);
}

TEST_CASE("trace export and reload round-trip exactly") {
    ScenarioSpec spec = spec_of(ScenarioKind::kMinTb2Trace, 30, 13);
    spec.num_entities = 4;
    EnvSequence orig = make_envs(spec);

    std::ostringstream sink;
    export_trace(orig, sink);

    std::istringstream source(sink.str());
    ScenarioSpec reload = spec_of(ScenarioKind::kMinTb2Trace, 1, 13);
    EnvSequence back = load_trace(source, reload);

    CHECK(back.spec.num_entities == 4);
    CHECK(back.spec.horizon == 30);
    REQUIRE(back.horizon() == 30);
    for (long t = 0; t < 30; ++t) CHECK(same_mintb(orig.mintb[t], back.mintb[t]));
}

TEST_CASE("rho scales multiply trace block sizes exactly") {
    ScenarioSpec spec = spec_of(ScenarioKind::kMinTb2Trace, 10, 13);
    EnvSequence orig = make_envs(spec); // 5 users
    std::ostringstream sink;
    export_trace(orig, sink);

    ScenarioSpec scaled = spec_of(ScenarioKind::kMinTb2Trace, 1, 13);
    scaled.rho_scales = {1.0, 2.0, 4.0, 6.0, 8.0};
    std::istringstream source(sink.str());
    EnvSequence back = load_trace(source, scaled);
    for (long t = 0; t < 10; ++t)
        for (int i = 0; i < 5; ++i)
            CHECK(back.mintb[t].rho[i] == orig.mintb[t].rho[i] * scaled.rho_scales[i]);

    ScenarioSpec wrong = spec_of(ScenarioKind::kMinTb2Trace, 1, 13);
    wrong.rho_scales = {1.0, 2.0};
    std::istringstream again(sink.str());
    CHECK_THROWS_WITH_AS(load_trace(again, wrong), doctest::Contains("rho_scales"), std::invalid_argument);
}

TEST_CASE("trace loader reports precise line numbers") {
    const ScenarioSpec spec = spec_of(ScenarioKind::kMinTb2Trace, 1, 1);
    const std::string header = "slot,user,events_b,bits_per_event_rho,snr_db\n";

    {
        std::istringstream in("");
        CHECK_THROWS_WITH_AS(load_trace(in, spec), doctest::Contains("empty"), std::runtime_error);
    }
    {
        std::istringstream in("slot,user,events\n1,0,10,5e4,25\n");
        CHECK_THROWS_WITH_AS(load_trace(in, spec), doctest::Contains("header"), std::runtime_error);
    }
    {
        std::istringstream in(header);
        CHECK_THROWS_WITH_AS(load_trace(in, spec), doctest::Contains("no data rows"), std::runtime_error);
    }
    {
        std::istringstream in(header + "1,0,10,5e4\n");
        CHECK_THROWS_WITH_AS(load_trace(in, spec), doctest::Contains("trace line 2"), std::runtime_error);
    }
    {
        std::istringstream in(header + "1,0,10,5e4,25\n1,1,40k,5e4,25\n");
        CHECK_THROWS_WITH_AS(load_trace(in, spec),
                             doctest::Contains("trace line 3"), std::runtime_error);
    }
    {
        std::istringstream in(header + "1,0,0,5e4,25\n");
        CHECK_THROWS_WITH_AS(load_trace(in, spec), doctest::Contains("positive"), std::runtime_error);
    }
    {
        // slot 2 is skipped
        std::istringstream in(header + "1,0,10,5e4,25\n3,0,10,5e4,25\n");
        CHECK_THROWS_WITH_AS(load_trace(in, spec), doctest::Contains("expected slot 2 user 0"),
                             std::runtime_error);
    }
    {
        // second slot is missing its second user
        std::istringstream in(header + "1,0,10,5e4,25\n1,1,10,5e4,25\n2,0,10,5e4,25\n");
        CHECK_THROWS_WITH_AS(load_trace(in, spec), doctest::Contains("mid-slot"), std::runtime_error);
    }
    {
        std::istringstream in(header + "2,0,10,5e4,25\n");
        CHECK_THROWS_WITH_AS(load_trace(in, spec), doctest::Contains("start at slot 1"), std::runtime_error);
    }
    {
        // Windows line endings and blank lines are tolerated
        std::istringstream in("slot,user,events_b,bits_per_event_rho,snr_db\r\n1,0,10,5e4,25\r\n\r\n");
        EnvSequence seq = load_trace(in, spec);
        CHECK(seq.horizon() == 1);
        CHECK(seq.mintb[0].b[0] == 10.0);
    }
}

TEST_CASE("trace files work end to end through make_envs") {
    ScenarioSpec gen = spec_of(ScenarioKind::kMinTb2Trace, 12, 77);
    EnvSequence orig = make_envs(gen);
    const std::string path = "/tmp/vranfair_test_trace.csv";
    export_trace_file(orig, path);

    ScenarioSpec custom = spec_of(ScenarioKind::kCustomFile, 1, 77);
    custom.trace_path = path;
    EnvSequence loaded = make_envs(custom);
    CHECK(loaded.note == path);
    REQUIRE(loaded.horizon() == 12);
    for (long t = 0; t < 12; ++t) CHECK(same_mintb(orig.mintb[t], loaded.mintb[t]));

    // the trace-or-synthetic kind prefers the file when a path is given
    ScenarioSpec fallback = spec_of(ScenarioKind::kMinTb2Trace, 1, 77);
    fallback.trace_path = path;
    EnvSequence via = make_envs(fallback);
    CHECK(via.note == path);
    CHECK(via.horizon() == 12);

    ScenarioSpec missing = spec_of(ScenarioKind::kCustomFile, 1, 77);
    missing.trace_path = "/tmp/vranfair_no_such_trace.csv";
    CHECK_THROWS_WITH_AS(make_envs(missing), doctest::Contains("cannot open"), std::runtime_error);
}

TEST_CASE("scenario json round-trips and rejects unknown keys") {
    ScenarioSpec spec = spec_of(ScenarioKind::kMinTb3, 512, 0xDEADBEEFCAFEBABEull);
    spec.num_entities = 4;
    spec.alpha = 2.0;
    spec.phi = 10.0;
    spec.snr_db = Bounds{20.0, 30.0};
    spec.rho_scales = {1.0, 2.0, 3.0, 4.0};

    const std::string text = scenario_to_json(spec);
    ScenarioSpec back = scenario_from_json(text);
    CHECK(back.kind == ScenarioKind::kMinTb3);
    CHECK(back.num_entities == 4);
    CHECK(back.horizon == 512);
    CHECK(back.seed == 0xDEADBEEFCAFEBABEull);
    CHECK(back.alpha == 2.0);
    CHECK(back.phi == 10.0);
    CHECK(back.rho_scales == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(scenario_to_json(back) == text); // canonical form is a fixed point

    // defaults (NaN SNR sentinel) survive a round-trip as "key omitted"
    ScenarioSpec plain = spec_of(ScenarioKind::kAssignment1, 100, 9);
    const std::string plain_text = scenario_to_json(plain);
    CHECK(plain_text.find("snr_db") == std::string::npos);
    ScenarioSpec plain_back = scenario_from_json(plain_text);
    CHECK(std::isnan(plain_back.snr_db.lo));
    CHECK(scenario_to_json(plain_back) == plain_text);

    CHECK_THROWS_WITH_AS(scenario_from_json("{\"kind\":\"mintb-1\",\"bogus\":1}"),
                         doctest::Contains("unknown scenario key 'bogus'"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(scenario_from_json("{\"kind\":\"mintb-1\",\"overrides\":{\"gamma\":1}}"),
                         doctest::Contains("unknown scenario override 'gamma'"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(scenario_from_json("{\"T\":10}"), doctest::Contains("kind"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(scenario_from_json("not json"), doctest::Contains("valid JSON"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(scenario_from_json("{\"kind\":\"mintb-1\",\"overrides\":{\"snr_db\":[20]}}"),
                         doctest::Contains("pair"), std::invalid_argument);
}
