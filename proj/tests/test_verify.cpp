#include "helpers.hpp"

#include "ellipq/verify.hpp"

using namespace ellipq;

TEST_CASE("same seed gives byte-identical reports") {
    for (const std::string s : {"theta-identities", "poisson-axioms", "boson-consistency"}) {
        SuiteParams p;
        p.seed = 7;
        p.count = 6;
        p.threads = 1;
        const auto a = run_suite(s, p).to_json(2);
        p.threads = 3;
        CHECK(run_suite(s, p).to_json(2) == a);
        p.seed = 8;
        CHECK(run_suite(s, p).to_json(2) != a);
    }
}

TEST_CASE("report json layout") {
    auto r = run_suite("theta-identities", {});
    const auto j = r.to_json(-1);
    CHECK(j.rfind("{\"suite\":\"theta-identities\",\"seed\":1,\"count\":100,", 0) == 0);
    CHECK(j.find("\"eta\":{\"re\":0.3,\"im\":0.8}") != std::string::npos);
    CHECK(r.pass);
    CHECK(r.max_residual <= 1e-10);
}

TEST_CASE("unknown names") {
    CHECK_THROWS_AS(run_suite("no-such-suite"), UnknownSuiteError);
    CHECK_THROWS_AS(boson_family("intro-9", 0.0, LatticeParams::make({0, 1})), DomainError);
    CHECK(suite_names().size() >= 8);
}

TEST_CASE("suites with known outcomes") {
    CHECK(run_suite("poisson-axioms").pass);
    CHECK(run_suite("dimension-rank").pass);
    CHECK(run_suite("hilbert-crosscheck").pass);

    SuiteParams p;
    p.tol = 1e-30;
    CHECK_FALSE(run_suite("poisson-axioms", p).pass);

    SuiteParams b;
    b.family = "single-2-2-2";
    b.count = 40;
    auto r = run_suite("boson-consistency", b);
    CHECK_FALSE(r.pass);
    CHECK(std::get<double>(r.scalars.at("tau_zero_relations_max")) < 1e-12);

    SuiteParams t;
    t.family = "tensor-3";
    t.count = 40;
    CHECK_FALSE(run_suite("boson-consistency", t).pass);
    t.zcoupling = ZCoupling::completed;
    CHECK(run_suite("boson-consistency", t).pass);

    SuiteParams s;
    s.n = 4;
    auto sc = run_suite("semiclassical", s);
    CHECK(sc.pass);
    CHECK(std::abs(std::get<Complex>(sc.scalars.at("scalar")) - 4.0) < 1e-6);
}
