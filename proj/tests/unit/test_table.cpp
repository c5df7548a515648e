#include "support.hpp"

#include <insightd/error.hpp>
#include <insightd/table.hpp>

#include <doctest.h>

#include <map>
#include <random>

using namespace insightd;

namespace {

Dataset csv(std::string_view text) { return parse_table(text, TableFormat::csv); }

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an insightd::Error");
    return ErrorCode::MalformedInput;
}

}  // namespace

TEST_CASE("minimal two-column csv") {
    const auto d = csv("a,b\n1,x\n2,y");
    CHECK(d.row_count() == 2);
    REQUIRE(d.fields().size() == 2);
    CHECK(d.field("a").kind == FieldKind::numerical);
    CHECK(d.field("b").kind == FieldKind::categorical);
    CHECK(numeric_column(d, "a") == std::vector<double>{1, 2});
}

TEST_CASE("header-only csv is an empty table") {
    CHECK(code_of([] { csv("a\n"); }) == ErrorCode::EmptyTable);
}

TEST_CASE("malformed inputs") {
    CHECK(code_of([] { csv(""); }) == ErrorCode::MalformedInput);
    CHECK(code_of([] { csv("a,b\n1,2,3\n"); }) == ErrorCode::MalformedInput);
    CHECK(code_of([] { csv("a,b\n\"1,2\n"); }) == ErrorCode::MalformedInput);
    CHECK(code_of([] { csv("a,a\n1,2\n"); }) == ErrorCode::DuplicateHeader);
    CHECK(code_of([] { parse_table("{\"a\":1}", TableFormat::json); }) == ErrorCode::MalformedInput);
    CHECK(code_of([] { parse_table("[{\"a\":{\"b\":1}}]", TableFormat::json); }) == ErrorCode::MalformedInput);
    CHECK(code_of([] { parse_table("[]", TableFormat::json); }) == ErrorCode::EmptyTable);
    CHECK(code_of([] { parse_table("[1,2", TableFormat::json); }) == ErrorCode::MalformedInput);
}

TEST_CASE("rfc 4180 quoting") {
    const auto d = csv("name,n\r\n\"Smith, J\",1\r\n\"say \"\"hi\"\"\",2\r\n");
    const auto names = category_column(d, "name");
    CHECK(names == std::vector<std::string>{"Smith, J", "say \"hi\""});
}

TEST_CASE("infer_field_kind examples") {
    SUBCASE("numbers") {
        const std::vector<std::string> raw{"1", "2", "3"};
        const auto c = infer_field_kind(raw);
        CHECK(c.kind == FieldKind::numerical);
        CHECK(std::get<double>(c.values[2]) == 3.0);
    }
    SUBCASE("iso dates") {
        const std::vector<std::string> raw{"1970-01-01", "1982-05-01"};
        const auto c = infer_field_kind(raw);
        CHECK(c.kind == FieldKind::temporal);
        CHECK(std::get<Timestamp>(c.values[1]).year() == 1982);
    }
    SUBCASE("one stray token out of 21 stays numerical") {
        std::vector<std::string> raw{"1", "x"};
        for (int i = 2; i <= 20; ++i) raw.push_back(std::to_string(i));
        REQUIRE(raw.size() == 21);
        const auto c = infer_field_kind(raw);
        CHECK(c.kind == FieldKind::numerical);
        CHECK(std::count_if(c.values.begin(), c.values.end(), [](const Value& v) { return is_missing(v); }) == 1);
    }
    SUBCASE("two stray tokens out of 21 fall back to categorical") {
        std::vector<std::string> raw{"x", "y"};
        for (int i = 1; i <= 19; ++i) raw.push_back(std::to_string(i));
        CHECK(infer_field_kind(raw).kind == FieldKind::categorical);
    }
    SUBCASE("missing tokens") {
        const std::vector<std::string> raw{"", "NA", "null", "Null", "4"};
        const auto c = infer_field_kind(raw);
        CHECK(c.kind == FieldKind::numerical);
        CHECK(std::count_if(c.values.begin(), c.values.end(), [](const Value& v) { return is_missing(v); }) == 4);
    }
    SUBCASE("four digit years") {
        const std::vector<std::string> raw{"1999", "2001", "2020"};
        // Plain integers parse as numbers first.
        CHECK(infer_field_kind(raw).kind == FieldKind::numerical);
        CHECK(parse_timestamp("1999").has_value());
        CHECK_FALSE(parse_timestamp("0999").has_value());
        CHECK_FALSE(parse_timestamp("3001").has_value());
    }
    SUBCASE("all missing") {
        const std::vector<std::string> raw{"", ""};
        CHECK(infer_field_kind(raw).kind == FieldKind::categorical);
    }
}

TEST_CASE("numeric_column and pair_columns") {
    const auto d = csv("a,b,c\n1,4,x\n,,y\n3,6,z\n2,,w\n");
    CHECK(numeric_column(d, "a") == std::vector<double>{1, 3, 2});
    const auto p = pair_columns(d, "a", "b");
    CHECK(p == std::vector<std::pair<double, double>>{{1, 4}, {3, 6}});
    CHECK_THROWS_AS(numeric_column(d, "c"), Error);
    CHECK(code_of([&] { numeric_column(d, "c"); }) == ErrorCode::KindMismatch);
    CHECK(code_of([&] { numeric_column(d, "zz"); }) == ErrorCode::UnknownField);

    const auto disjoint = csv("a,b\n1,\n,2\n5,\n,6\n");
    CHECK(pair_columns(disjoint, "a", "b").empty());
    // Inference never makes an all-missing column numerical, so build one directly.
    const Dataset empty("e", {Column{"a", FieldKind::numerical, {Missing{}, Missing{}}}});
    CHECK(numeric_column(empty, "a").empty());
}

TEST_CASE("json tables keep key order and scalar types") {
    const auto d = parse_table(R"([{"b":1,"a":"x","c":null},{"a":"y","b":2.5,"c":true}])", TableFormat::json);
    REQUIRE(d.fields().size() == 3);
    CHECK(d.fields()[0].name == "b");
    CHECK(d.fields()[1].name == "a");
    CHECK(d.field("b").kind == FieldKind::numerical);
    CHECK(d.field("c").missing_count == 1);
}

TEST_CASE("cars fixture") {
    const auto d = test_support::cars();
    CHECK(d->row_count() == 406);
    std::map<FieldKind, int> kinds;
    for (const auto& f : d->fields()) ++kinds[f.kind];
    CHECK(kinds[FieldKind::categorical] == 3);
    CHECK(kinds[FieldKind::temporal] == 1);
    CHECK(kinds[FieldKind::numerical] == 5);
    CHECK(d->field("Cylinders").kind == FieldKind::categorical);
    CHECK(d->field("Year").kind == FieldKind::temporal);
    CHECK(numeric_column(*d, "Weight_in_lbs").size() == 406 - d->field("Weight_in_lbs").missing_count);
    CHECK(pair_columns(*d, "Displacement", "Miles_per_Gallon").size() == 398);

    const auto json = parse_table(test_support::read_file(test_support::data_path("cars.json")), TableFormat::json);
    REQUIRE(json.fields().size() == d->fields().size());
    for (std::size_t i = 0; i < json.fields().size(); ++i) {
        CHECK(json.fields()[i].name == d->fields()[i].name);
        CHECK(json.fields()[i].kind == d->fields()[i].kind);
        CHECK(json.fields()[i].missing_count == d->fields()[i].missing_count);
    }
}

TEST_CASE("properties over random tables") {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 200; ++round) {
        const int rows = 1 + static_cast<int>(rng() % 40);
        std::string text = "n,m,c\n";
        for (int r = 0; r < rows; ++r) {
            const bool miss_n = rng() % 5 == 0;
            const bool miss_c = rng() % 7 == 0;
            const bool miss_m = rng() % 3 == 0;
            text += (miss_n ? std::string{} : std::to_string(static_cast<int>(rng() % 1000) - 500)) + "," +
                    (miss_m ? std::string{} : std::to_string(rng() % 7) + ".5") + "," +
                    (miss_c ? std::string{} : "k" + std::to_string(rng() % 4)) + "\n";
        }
        const auto a = csv(text);
        const auto b = csv(text);
        CHECK(a.id() == b.id());
        for (const auto& f : a.fields()) {
            const auto cells = a.cells(f.name);
            const auto present =
                std::count_if(cells.begin(), cells.end(), [](const Value& v) { return !is_missing(v); });
            CHECK(f.missing_count + static_cast<std::size_t>(present) == a.row_count());
            CHECK(b.field(f.name).kind == f.kind);
        }
        if (a.field("n").kind == FieldKind::numerical && a.field("m").kind == FieldKind::numerical) {
            auto fwd = pair_columns(a, "n", "m");
            auto rev = pair_columns(a, "m", "n");
            REQUIRE(fwd.size() == rev.size());
            for (std::size_t i = 0; i < fwd.size(); ++i) CHECK(fwd[i] == std::pair(rev[i].second, rev[i].first));
        }
        CHECK(a.field("c").kind != FieldKind::numerical);  // no token of c parses as a number
    }
}
