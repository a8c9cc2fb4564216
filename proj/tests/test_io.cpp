#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "expsum/errors.hpp"
#include "expsum/io.hpp"
#include "expsum/recovery.hpp"
#include "json.hpp"

using namespace expsum;

namespace {

bool message_contains(const std::exception& e, const std::string& needle) {
    return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("model JSON round-trips bitwise") {
    SUBCASE("terms plus constant") {
        ExpSumModel m({{1.0 / 3.0, -0.123456789012345678}, {2.718281828459045, 1.0 / 7.0}}, 0.1);
        ExpSumModel back = io::model_from_json(io::model_to_json(m));
        REQUIRE(back.n_terms() == 2);
        for (int i = 0; i < 2; ++i) {
            CHECK(back.terms()[i].coeff == m.terms()[i].coeff);
            CHECK(back.terms()[i].rate == m.terms()[i].rate);
        }
        REQUIRE(back.constant().has_value());
        CHECK(*back.constant() == 0.1);
    }
    SUBCASE("no constant key when absent") {
        ExpSumModel m({{2.0, -0.5}});
        std::string text = io::model_to_json(m);
        CHECK(text.find("constant") == std::string::npos);
        ExpSumModel back = io::model_from_json(text);
        CHECK(!back.constant().has_value());
        CHECK(back.terms()[0].coeff == 2.0);
    }
}

TEST_CASE("model JSON rejects malformed documents") {
    CHECK_THROWS_AS(io::model_from_json("not json"), FormatError);
    CHECK_THROWS_AS(io::model_from_json("[1,2,3]"), FormatError);
    CHECK_THROWS_AS(io::model_from_json(R"({"terms": 5})"), FormatError);
    CHECK_THROWS_AS(io::model_from_json(R"({"terms": [{"c": 1.0}]})"), FormatError);
    CHECK_THROWS_AS(io::model_from_json(R"({"terms": [{"c": 1.0, "alpha": "x"}]})"), FormatError);
    CHECK_THROWS_AS(io::model_from_json(R"({"terms": []})"), FormatError);
    // structurally fine but semantically invalid: zero rate
    CHECK_THROWS_AS(io::model_from_json(R"({"terms": [{"c": 1.0, "alpha": 0.0}]})"), FormatError);
    CHECK_THROWS_AS(io::model_from_json(R"({"terms": [{"c": 1.0, "alpha": 1.0}], "constant": "z"})"),
                    FormatError);
}

TEST_CASE("records CSV round-trips bitwise") {
    ExpSumModel m({{1.0 / 3.0, 0.7}, {-2.0, -1.0 / 9.0}});
    auto records = exact_records(m, {0.0, 0.1, 1.0 / 3.0, 2.5}, 2);
    std::string csv = io::records_to_csv(records);
    CHECK(csv.rfind("t,f,J1,J2\n", 0) == 0);
    std::istringstream in(csv);
    auto back = io::records_from_csv(in);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].t == records[i].t);
        CHECK(back[i].f_value == records[i].f_value);
        REQUIRE(back[i].integrals.size() == 2);
        CHECK(back[i].integrals[0] == records[i].integrals[0]);
        CHECK(back[i].integrals[1] == records[i].integrals[1]);
    }
}

TEST_CASE("records CSV errors carry line numbers") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return io::records_from_csv(in);
    };
    SUBCASE("empty input") {
        CHECK_THROWS_AS(parse(""), FormatError);
    }
    SUBCASE("bad header") {
        try {
            parse("time,f,J1\n0.5,1.0,0.4\n");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(message_contains(e, "line 1"));
        }
    }
    SUBCASE("header but no rows") {
        try {
            parse("t,f,J1\n");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(message_contains(e, "no rows"));
        }
    }
    SUBCASE("wrong column count names the row") {
        try {
            parse("t,f,J1\n0.5,1.0,0.4\n0.8,2.0\n");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(message_contains(e, "line 3"));
        }
    }
    SUBCASE("unparseable number names the row") {
        try {
            parse("t,f,J1\n0.5,one,0.4\n");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(message_contains(e, "line 2"));
            CHECK(message_contains(e, "cannot parse"));
        }
    }
    SUBCASE("non-finite values are refused") {
        try {
            parse("t,f,J1\n0.5,nan,0.4\n");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(message_contains(e, "line 2"));
            CHECK(message_contains(e, "non-finite"));
        }
        CHECK_THROWS_AS(parse("t,f,J1\n0.5,inf,0.4\n"), FormatError);
    }
    SUBCASE("duplicate and decreasing times are distinct errors") {
        try {
            parse("t,f,J1\n0.5,1.0,0.4\n0.5,2.0,0.6\n");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(message_contains(e, "line 3"));
            CHECK(message_contains(e, "duplicate"));
        }
        try {
            parse("t,f,J1\n0.5,1.0,0.4\n0.3,2.0,0.6\n");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(message_contains(e, "strictly increasing"));
        }
    }
    SUBCASE("spaces and CRLF endings are tolerated") {
        std::istringstream in("t,f,J1\r\n0.5, 1.0, 0.4\r\n1.0,2.0,0.9\r\n");
        auto recs = io::records_from_csv(in);
        REQUIRE(recs.size() == 2);
        CHECK(recs[0].f_value == 1.0);
    }
}

TEST_CASE("signal CSV round-trips and validates") {
    auto s = DenseSignal::tabulate([](double t) { return std::exp(-t) + 0.1; }, 2.0, 51);
    std::string csv = io::signal_to_csv(s);
    CHECK(csv.rfind("t,f\n", 0) == 0);
    std::istringstream in(csv);
    DenseSignal back = io::signal_from_csv(in);
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.grid()[i] == s.grid()[i]);
        CHECK(back.values()[i] == s.values()[i]);
    }

    std::istringstream bad_start("t,f\n0.5,1.0\n1.0,2.0\n1.5,3.0\n");
    CHECK_THROWS_AS(io::signal_from_csv(bad_start), FormatError);
    std::istringstream bad_header("x,y\n0.0,1.0\n");
    CHECK_THROWS_AS(io::signal_from_csv(bad_header), FormatError);
    std::istringstream ragged("t,f\n0.0,1.0,9\n");
    CHECK_THROWS_AS(io::signal_from_csv(ragged), FormatError);
}

TEST_CASE("result JSON exposes the full recovery outcome") {
    ExpSumModel truth({{1.0, 1.0}, {1.0, -1.0}});
    RecoveryProblem p;
    p.n_terms = 2;
    p.records = exact_records(truth, {0.3, 0.9, 1.6, 2.5}, 2);
    RecoveryResult r = recover(p);
    std::string text = io::result_to_json(r, 0.042);
    auto j = nlohmann::json::parse(text);
    CHECK(j.at("mode") == "strict");
    CHECK(j.at("model").at("terms").size() == 2);
    CHECK(j.at("x").size() == 4);
    CHECK(j.at("frobenius_low_coeffs").size() == 2);
    CHECK(j.at("cond_estimate").get<double>() > 0.0);
    CHECK(j.at("wall_seconds").get<double>() == doctest::Approx(0.042));
    CHECK(j.at("warnings").is_array());
    // and the embedded model re-parses through the model reader
    ExpSumModel back = io::model_from_json(j.at("model").dump());
    CHECK(back.n_terms() == 2);
}
