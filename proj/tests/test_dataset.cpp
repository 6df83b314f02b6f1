#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "dtrl/dataset.hpp"

using namespace dtrl;

namespace {
std::string data_file(const char* name) { return std::string(DTRL_TEST_DATA_DIR) + "/" + name; }

std::string temp_csv(const std::string& name, const std::string& content) {
    std::string path = "/tmp/dtrl_test_" + name;
    std::ofstream out(path);
    out << content;
    return path;
}
} // namespace

TEST_CASE("banknote loads with the expected shape") {
    RawDataset raw = load_csv(data_file("banknote.csv"), "class");
    CHECK(raw.rows.size() == 1372);
    CHECK(raw.feature_count() == 4);
    CHECK(raw.name == "banknote");
    Dataset ds = normalize(raw);
    CHECK(ds.class_count() == 2);
    for (double v : ds.samples) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("wine loads with the expected shape") {
    Dataset ds = normalize(load_csv(data_file("wine.csv"), "class"));
    CHECK(ds.n == 178);
    CHECK(ds.d == 13);
    CHECK(ds.class_count() == 3);
}

TEST_CASE("diabetes loads with the expected shape") {
    Dataset ds = normalize(load_csv(data_file("diabetes.csv"), "class"));
    CHECK(ds.n == 520);
    CHECK(ds.d == 16);
    CHECK(ds.class_count() == 2);
}

TEST_CASE("load errors are distinct and informative") {
    CHECK_THROWS_AS(load_csv("/nonexistent/nope.csv", "y"), IoError);

    auto missing_label = temp_csv("ml.csv", "a,b\n1,2\n3,4\n");
    CHECK_THROWS_WITH(load_csv(missing_label, "y"), Catch::Matchers::ContainsSubstring("label column"));

    auto non_numeric = temp_csv("nn.csv", "a,y\n1,x\noops,z\n");
    CHECK_THROWS_WITH(load_csv(non_numeric, "y"), Catch::Matchers::ContainsSubstring("non-numeric"));

    auto empty = temp_csv("empty.csv", "a,y\n");
    CHECK_THROWS_WITH(load_csv(empty, "y"), Catch::Matchers::ContainsSubstring("no data rows"));

    auto no_features = temp_csv("nf.csv", "y\n1\n");
    CHECK_THROWS_WITH(load_csv(no_features, "y"), Catch::Matchers::ContainsSubstring("no feature columns"));

    auto one_class = temp_csv("oc.csv", "a,y\n1,same\n2,same\n");
    CHECK_THROWS_WITH(load_csv(one_class, "y"), Catch::Matchers::ContainsSubstring("2 distinct labels"));

    auto ragged = temp_csv("rg.csv", "a,b,y\n1,2,x\n1,y\n");
    CHECK_THROWS_AS(load_csv(ragged, "y"), FormatError);
}

TEST_CASE("normalize maps min to 0 and max to 1") {
    auto path = temp_csv("affine.csv", "f,y\n2,a\n4,b\n6,a\n");
    Dataset ds = normalize(load_csv(path, "y"));
    CHECK(ds.at(0, 0) == 0.0);
    CHECK(ds.at(1, 0) == 0.5);
    CHECK(ds.at(2, 0) == 1.0);
    CHECK(ds.scaler[0].first == 2.0);
    CHECK(ds.scaler[0].second == 6.0);
}

TEST_CASE("constant feature maps to zero with its scaler recorded") {
    auto path = temp_csv("const.csv", "f,g,y\n5,1,a\n5,2,b\n5,3,a\n");
    Dataset ds = normalize(load_csv(path, "y"));
    for (std::size_t i = 0; i < ds.n; ++i) CHECK(ds.at(i, 0) == 0.0);
    CHECK(ds.scaler[0] == std::make_pair(5.0, 5.0));
}

TEST_CASE("scaler round-trips") {
    Dataset ds = normalize(load_csv(data_file("wine.csv"), "class"));
    RawDataset raw = load_csv(data_file("wine.csv"), "class");
    for (std::size_t i = 0; i < ds.n; i += 7)
        for (int k = 0; k < ds.d; ++k)
            CHECK(std::abs(ds.denormalize(k, ds.at(i, k)) - raw.rows[i].features[k]) <= 1e-12);
}

TEST_CASE("normalize is idempotent on its own output") {
    Dataset ds = normalize(load_csv(data_file("banknote.csv"), "class"));
    RawDataset again;
    again.feature_names = ds.feature_names;
    again.label_name = "label";
    for (std::size_t i = 0; i < ds.n; ++i) {
        RawDataset::Row r;
        for (int k = 0; k < ds.d; ++k) r.features.push_back(ds.at(i, k));
        r.label = ds.class_names[ds.labels[i]];
        again.rows.push_back(r);
    }
    Dataset ds2 = normalize(again);
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        CHECK(std::abs(ds.samples[i] - ds2.samples[i]) <= 1e-12);
}

TEST_CASE("label mapping is a bijection onto 0..K-1 in first-occurrence order") {
    auto path = temp_csv("labels.csv", "f,y\n1,red\n2,blue\n3,red\n4,green\n5,blue\n");
    Dataset ds = normalize(load_csv(path, "y"));
    REQUIRE(ds.class_names == std::vector<std::string>{"red", "blue", "green"});
    std::vector<int> seen(ds.class_count(), 0);
    for (int l : ds.labels) {
        REQUIRE(l >= 0);
        REQUIRE(l < ds.class_count());
        seen[l] = 1;
    }
    for (int s : seen) CHECK(s == 1);
    CHECK(ds.labels == std::vector<int>{0, 1, 0, 2, 1});
}

TEST_CASE("save and reload round-trips samples and labels") {
    Dataset ds = normalize(load_csv(data_file("wine.csv"), "class"));
    std::string path = "/tmp/dtrl_test_roundtrip.csv";
    save_csv(ds, path);
    Dataset ds2 = normalize(load_csv(path, "label"));
    REQUIRE(ds2.n == ds.n);
    REQUIRE(ds2.d == ds.d);
    CHECK(ds2.labels == ds.labels);
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        CHECK(ds2.samples[i] == Catch::Approx(ds.samples[i]).margin(1e-15));
}
