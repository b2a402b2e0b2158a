#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "sce/dataset.hpp"
#include "test_util.hpp"

using namespace sce;
using test_util::TempDir;
using test_util::write_file;

namespace {

Dataset load_text(const TempDir& dir, const std::string& text,
                  const std::string& label = "label",
                  MissingPolicy policy = MissingPolicy::fail) {
    const auto path = dir.file("data.csv");
    write_file(path, text);
    return load_csv(path, LabelColumn::name_or_index(label), policy);
}

// Independent restatement of the documented rounding rule: floor each
// fraction*n, then hand leftovers to train, validation, test in order,
// skipping parts with fraction zero.
std::array<std::size_t, 3> expected_part_sizes(std::size_t n, const SplitSpec& spec) {
    const std::array<double, 3> f = {spec.train_fraction, spec.validation_fraction,
                                     spec.test_fraction};
    std::array<std::size_t, 3> counts{};
    std::size_t assigned = 0;
    for (int p = 0; p < 3; ++p) {
        counts[p] = static_cast<std::size_t>(std::floor(f[p] * static_cast<double>(n)));
        assigned += counts[p];
    }
    for (int p = 0; p < 3 && assigned < n; ++p) {
        if (f[p] > 0.0) {
            ++counts[p];
            ++assigned;
        }
    }
    return counts;
}

std::multiset<std::pair<std::vector<double>, int>> row_multiset(
    const Dataset& data, const std::vector<Eigen::Index>& rows) {
    std::multiset<std::pair<std::vector<double>, int>> out;
    for (Eigen::Index r : rows) {
        std::vector<double> values(static_cast<std::size_t>(data.dim()));
        for (Eigen::Index d = 0; d < data.dim(); ++d)
            values[static_cast<std::size_t>(d)] = data.features(r, d);
        out.emplace(std::move(values), data.labels[static_cast<std::size_t>(r)]);
    }
    return out;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("labels are dense indices in first-appearance order") {
    TempDir dir;
    const auto data = load_text(dir,
                                "x,label\n"
                                "1.0,b\n"
                                "2.0,a\n"
                                "3.0,b\n");
    CHECK(data.labels == std::vector<int>{0, 1, 0});
    CHECK(data.class_names == std::vector<std::string>{"b", "a"});
    CHECK(data.num_classes() == 2);
    CHECK(data.n() == 3);
    CHECK(data.dim() == 1);
}

TEST_CASE("label column can be named or a zero-based index") {
    TempDir dir;
    const std::string text =
        "a,b,c\n"
        "1,x,2\n"
        "3,y,4\n";
    const auto path = dir.file("data.csv");
    write_file(path, text);

    const auto by_name = load_csv(path, LabelColumn::name_or_index("b"), MissingPolicy::fail);
    const auto by_index = load_csv(path, LabelColumn::name_or_index("1"), MissingPolicy::fail);
    CHECK(by_name.labels == by_index.labels);
    CHECK(by_name.feature_names == std::vector<std::string>{"a", "c"});
    CHECK(by_name.features(0, 1) == 2.0);
    CHECK(by_index.features(1, 0) == 3.0);
}

TEST_CASE("mean imputation fills a single missing cell with the column mean") {
    TempDir dir;
    const auto data = load_text(dir,
                                "x,label\n"
                                "1.0,a\n"
                                "NA,b\n"
                                "3.0,a\n",
                                "label", MissingPolicy::mean_impute);
    CHECK(data.features(0, 0) == 1.0);
    CHECK(data.features(1, 0) == 2.0);
    CHECK(data.features(2, 0) == 3.0);
}

TEST_CASE("mean imputation matches a per-column mean oracle") {
    // 4x3 grid with one missing cell per column, at different rows.
    TempDir dir;
    const std::string text =
        "p,q,r,label\n"
        "NA,2.0,7.0,a\n"
        "4.0,,1.0,b\n"
        "6.0,8.0,NaN,a\n"
        "10.0,0.5,3.0,b\n";
    const auto data = load_text(dir, text, "label", MissingPolicy::mean_impute);

    // Oracle: means over the present cells, computed by hand from the text.
    const double mean_p = (4.0 + 6.0 + 10.0) / 3.0;
    const double mean_q = (2.0 + 8.0 + 0.5) / 3.0;
    const double mean_r = (7.0 + 1.0 + 3.0) / 3.0;
    CHECK(data.features(0, 0) == doctest::Approx(mean_p).epsilon(1e-15));
    CHECK(data.features(1, 1) == doctest::Approx(mean_q).epsilon(1e-15));
    CHECK(data.features(2, 2) == doctest::Approx(mean_r).epsilon(1e-15));
    // Present cells are untouched.
    CHECK(data.features(1, 0) == 4.0);
    CHECK(data.features(3, 2) == 3.0);
}

TEST_CASE("imputed output is idempotent under a second imputation pass") {
    TempDir dir;
    const std::string text =
        "p,q,label\n"
        "NA,2.0,a\n"
        "4.0,na,b\n"
        "6.0,8.0,a\n";
    const auto once = load_text(dir, text, "label", MissingPolicy::mean_impute);

    // Write the imputed matrix back out and reload; nothing should change.
    std::string rewritten = "p,q,label\n";
    for (Eigen::Index r = 0; r < once.n(); ++r) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s\n", once.features(r, 0), once.features(r, 1),
                      once.class_names[static_cast<std::size_t>(once.labels[static_cast<std::size_t>(r)])].c_str());
        rewritten += buf;
    }
    TempDir dir2;
    const auto twice = load_text(dir2, rewritten, "label", MissingPolicy::mean_impute);
    CHECK((once.features - twice.features).cwiseAbs().maxCoeff() == 0.0);
    CHECK(once.labels == twice.labels);
}

TEST_CASE("missing markers are empty, NA and NaN, case-insensitive") {
    TempDir dir;
    const auto data = load_text(dir,
                                "x,label\n"
                                ",a\n"
                                "Na,b\n"
                                "nAn,a\n"
                                "5.0,b\n",
                                "label", MissingPolicy::mean_impute);
    for (Eigen::Index r = 0; r < 3; ++r) CHECK(data.features(r, 0) == 5.0);
}

TEST_CASE("missing cells throw under the fail policy") {
    TempDir dir;
    const auto path = dir.file("data.csv");
    write_file(path,
               "x,label\n"
               "1.0,a\n"
               "NA,b\n");
    CHECK_THROWS_AS(load_csv(path, LabelColumn::name_or_index("label"), MissingPolicy::fail),
                    std::runtime_error);
}

TEST_CASE("load errors carry the offending location") {
    TempDir dir;
    const auto path = dir.file("data.csv");

    SUBCASE("non-numeric cell") {
        write_file(path, "x,label\n1.0,a\noops,b\n");
        CHECK_THROWS_WITH_AS(load_csv(path, LabelColumn::name_or_index("label"), MissingPolicy::fail),
                             doctest::Contains("non-numeric cell 'oops' in row 3"),
                             std::runtime_error);
    }
    SUBCASE("ragged row") {
        write_file(path, "x,y,label\n1.0,2.0,a\n1.0,b\n");
        CHECK_THROWS_WITH_AS(load_csv(path, LabelColumn::name_or_index("label"), MissingPolicy::fail),
                             doctest::Contains("row 3"), std::runtime_error);
    }
    SUBCASE("unknown label column") {
        write_file(path, "x,label\n1.0,a\n2.0,b\n");
        CHECK_THROWS_WITH_AS(load_csv(path, LabelColumn::name_or_index("target"), MissingPolicy::fail),
                             doctest::Contains("'target' not found"), std::runtime_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_csv(dir.file("absent.csv"), LabelColumn::name_or_index("label"),
                                 MissingPolicy::fail),
                        std::runtime_error);
    }
    SUBCASE("header only") {
        write_file(path, "x,label\n");
        CHECK_THROWS_AS(load_csv(path, LabelColumn::name_or_index("label"), MissingPolicy::fail),
                        std::runtime_error);
    }
    SUBCASE("fully missing column") {
        write_file(path, "x,y,label\nNA,1.0,a\nNA,2.0,b\n");
        CHECK_THROWS_WITH_AS(load_csv(path, LabelColumn::name_or_index("label"),
                                      MissingPolicy::mean_impute),
                             doctest::Contains("no present values to impute from"),
                             std::runtime_error);
    }
    SUBCASE("single class") {
        write_file(path, "x,label\n1.0,a\n2.0,a\n");
        CHECK_THROWS_WITH_AS(load_csv(path, LabelColumn::name_or_index("label"), MissingPolicy::fail),
                             doctest::Contains("fewer than 2 classes"), std::runtime_error);
    }
    SUBCASE("empty label cell") {
        write_file(path, "x,label\n1.0,a\n2.0,\n");
        CHECK_THROWS_WITH_AS(load_csv(path, LabelColumn::name_or_index("label"), MissingPolicy::fail),
                             doctest::Contains("empty label in row 3"), std::runtime_error);
    }
}

TEST_CASE("parser handles quoting, CRLF, BOM and blank lines") {
    TempDir dir;
    const std::string text =
        "\xEF\xBB\xBF\"x\",\"the,label\"\r\n"
        "1.5,\"a\"\"b\"\r\n"
        "\r\n"
        " 2.5 ,plain\r\n";
    const auto data = load_text(dir, text, "the,label");
    CHECK(data.n() == 2);
    CHECK(data.feature_names == std::vector<std::string>{"x"});
    CHECK(data.class_names == std::vector<std::string>{"a\"b", "plain"});
    CHECK(data.features(0, 0) == 1.5);
    CHECK(data.features(1, 0) == 2.5);  // unquoted fields are trimmed
}

TEST_CASE("select_rows and select_columns subset and bounds-check") {
    TempDir dir;
    const auto data = load_text(dir,
                                "p,q,r,label\n"
                                "1,2,3,a\n"
                                "4,5,6,b\n"
                                "7,8,9,a\n");
    const auto rows = data.select_rows({2, 0});
    CHECK(rows.n() == 2);
    CHECK(rows.features(0, 0) == 7.0);
    CHECK(rows.labels == std::vector<int>{0, 0});
    CHECK(rows.class_names == data.class_names);

    const auto cols = data.select_columns({2, 0});
    CHECK(cols.feature_names == std::vector<std::string>{"r", "p"});
    CHECK(cols.features(1, 0) == 6.0);
    CHECK(cols.features(1, 1) == 4.0);

    CHECK_THROWS_AS(data.select_columns({3}), std::out_of_range);
    CHECK_THROWS_AS(data.select_columns({-1}), std::out_of_range);
}

TEST_CASE("validate rejects inconsistent datasets") {
    Dataset data;
    data.features.resize(2, 1);
    data.features << 1.0, 2.0;
    data.labels = {0, 1};
    data.feature_names = {"x"};
    data.class_names = {"a", "b"};
    CHECK_NOTHROW(data.validate());

    SUBCASE("label count mismatch") {
        data.labels.push_back(0);
        CHECK_THROWS_AS(data.validate(), std::invalid_argument);
    }
    SUBCASE("label out of range") {
        data.labels[1] = 2;
        CHECK_THROWS_AS(data.validate(), std::invalid_argument);
    }
    SUBCASE("empty class") {
        data.labels[1] = 0;
        CHECK_THROWS_AS(data.validate(), std::invalid_argument);
    }
    SUBCASE("non-finite feature") {
        data.features(0, 0) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(data.validate(), std::invalid_argument);
    }
    SUBCASE("feature name count mismatch") {
        data.feature_names.push_back("y");
        CHECK_THROWS_AS(data.validate(), std::invalid_argument);
    }
}

TEST_CASE("standardizer handles constant and two-point columns") {
    Dataset data;
    data.features.resize(3, 1);
    data.features << 2.0, 2.0, 2.0;
    data.labels = {0, 1, 0};
    data.feature_names = {"x"};
    data.class_names = {"a", "b"};

    auto params = fit_standardizer(data);
    CHECK(params.mean(0) == 2.0);
    CHECK(params.scale(0) == 1.0);  // zero variance keeps scale 1

    data.features.resize(2, 1);
    data.features << 0.0, 2.0;
    data.labels = {0, 1};
    params = fit_standardizer(data);
    CHECK(params.mean(0) == 1.0);
    CHECK(params.scale(0) == 1.0);  // population std of {0, 2}
}

TEST_CASE("standardized data has zero mean and unit population variance") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> normal(3.0, 2.5);
    Dataset data;
    data.features.resize(40, 3);
    for (Eigen::Index r = 0; r < 40; ++r)
        for (Eigen::Index d = 0; d < 3; ++d) data.features(r, d) = normal(gen);
    data.labels.assign(40, 0);
    for (int i = 20; i < 40; ++i) data.labels[static_cast<std::size_t>(i)] = 1;
    data.feature_names = {"a", "b", "c"};
    data.class_names = {"x", "y"};

    const auto params = fit_standardizer(data);
    const auto standardized = apply_standardizer(params, data);

    // Oracle: recompute the moments of the transformed matrix directly.
    for (Eigen::Index d = 0; d < 3; ++d) {
        double sum = 0.0, sq = 0.0;
        for (Eigen::Index r = 0; r < 40; ++r) {
            sum += standardized.features(r, d);
            sq += standardized.features(r, d) * standardized.features(r, d);
        }
        const double mean = sum / 40.0;
        const double var = sq / 40.0 - mean * mean;
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::abs(var - 1.0) < 1e-12);
    }

    // Elementwise oracle for the transform itself.
    for (Eigen::Index r = 0; r < 5; ++r)
        for (Eigen::Index d = 0; d < 3; ++d)
            CHECK(standardized.features(r, d) ==
                  doctest::Approx((data.features(r, d) - params.mean(d)) / params.scale(d))
                      .epsilon(1e-15));

    const auto restored = invert_standardizer(params, standardized);
    CHECK((restored.features - data.features).cwiseAbs().maxCoeff() < 1e-10);

    Dataset wrong = data;
    wrong.features.resize(40, 2);
    wrong.feature_names = {"a", "b"};
    CHECK_THROWS_AS(apply_standardizer(params, wrong), std::invalid_argument);
}

TEST_CASE("split spec validation") {
    SplitSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.train_fraction = -0.1;
    spec.test_fraction = 1.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = SplitSpec{0.5, 0.5, 0.5, true, 0};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("balanced 50:50 split gives 25 per class per part") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> normal;
    Dataset data;
    data.features.resize(100, 2);
    for (Eigen::Index r = 0; r < 100; ++r)
        for (Eigen::Index d = 0; d < 2; ++d) data.features(r, d) = normal(gen);
    for (int i = 0; i < 100; ++i) data.labels.push_back(i % 2);
    data.feature_names = {"a", "b"};
    data.class_names = {"even", "odd"};

    SplitSpec spec;
    spec.train_fraction = 0.5;
    spec.validation_fraction = 0.0;
    spec.test_fraction = 0.5;
    spec.seed = 3;

    const auto sets = split(data, spec);
    CHECK(sets.train.n() == 50);
    CHECK(sets.validation.n() == 0);
    CHECK(sets.test.n() == 50);
    for (const auto* part : {&sets.train, &sets.test}) {
        CHECK(part->class_indices(0).size() == 25);
        CHECK(part->class_indices(1).size() == 25);
    }
}

TEST_CASE("split sizes follow the floor-and-leftover rule") {
    // 103 samples, classes of 60 and 43, default 70:10:20 fractions.
    std::mt19937_64 gen(5);
    std::normal_distribution<double> normal;
    Dataset data;
    data.features.resize(103, 2);
    for (Eigen::Index r = 0; r < 103; ++r)
        for (Eigen::Index d = 0; d < 2; ++d) data.features(r, d) = normal(gen);
    for (int i = 0; i < 103; ++i) data.labels.push_back(i < 60 ? 0 : 1);
    data.feature_names = {"a", "b"};
    data.class_names = {"big", "small"};

    SplitSpec spec;
    spec.seed = 17;
    const auto indices = split_indices(data, spec);

    const auto class0 = expected_part_sizes(60, spec);
    const auto class1 = expected_part_sizes(43, spec);
    auto count_class = [&](const std::vector<Eigen::Index>& part, int label) {
        return std::count_if(part.begin(), part.end(), [&](Eigen::Index i) {
            return data.labels[static_cast<std::size_t>(i)] == label;
        });
    };
    CHECK(count_class(indices.train, 0) == static_cast<long>(class0[0]));
    CHECK(count_class(indices.validation, 0) == static_cast<long>(class0[1]));
    CHECK(count_class(indices.test, 0) == static_cast<long>(class0[2]));
    CHECK(count_class(indices.train, 1) == static_cast<long>(class1[0]));
    CHECK(count_class(indices.validation, 1) == static_cast<long>(class1[1]));
    CHECK(count_class(indices.test, 1) == static_cast<long>(class1[2]));

    // The three parts partition 0..N-1.
    std::vector<Eigen::Index> all;
    for (const auto* part : {&indices.train, &indices.validation, &indices.test})
        all.insert(all.end(), part->begin(), part->end());
    std::sort(all.begin(), all.end());
    CHECK(all.size() == 103);
    for (Eigen::Index i = 0; i < 103; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("splits are deterministic in the seed") {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> normal;
    Dataset data;
    data.features.resize(30, 2);
    for (Eigen::Index r = 0; r < 30; ++r)
        for (Eigen::Index d = 0; d < 2; ++d) data.features(r, d) = normal(gen);
    for (int i = 0; i < 30; ++i) data.labels.push_back(i % 3 == 0 ? 0 : 1);
    data.feature_names = {"a", "b"};
    data.class_names = {"x", "y"};

    SplitSpec spec;
    spec.seed = 42;
    const auto a = split_indices(data, spec);
    const auto b = split_indices(data, spec);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);

    spec.seed = 43;
    const auto c = split_indices(data, spec);
    CHECK(a.train != c.train);
}

TEST_CASE("split contents are stable under row permutation") {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> normal;
    Dataset data;
    data.features.resize(24, 3);
    for (Eigen::Index r = 0; r < 24; ++r)
        for (Eigen::Index d = 0; d < 3; ++d) data.features(r, d) = normal(gen);
    for (int i = 0; i < 24; ++i) data.labels.push_back(i % 2);
    data.feature_names = {"a", "b", "c"};
    data.class_names = {"x", "y"};

    std::vector<Eigen::Index> perm(24);
    for (Eigen::Index i = 0; i < 24; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), gen);
    const auto shuffled = data.select_rows(perm);

    SplitSpec spec;
    spec.seed = 8;
    const auto original = split_indices(data, spec);
    const auto permuted = split_indices(shuffled, spec);

    CHECK(row_multiset(data, original.train) == row_multiset(shuffled, permuted.train));
    CHECK(row_multiset(data, original.validation) == row_multiset(shuffled, permuted.validation));
    CHECK(row_multiset(data, original.test) == row_multiset(shuffled, permuted.test));
}

TEST_CASE("stratification rejects classes smaller than the part count") {
    Dataset data;
    data.features.resize(5, 1);
    data.features << 1, 2, 3, 4, 5;
    data.labels = {0, 0, 0, 0, 1};
    data.feature_names = {"x"};
    data.class_names = {"big", "tiny"};
    SplitSpec spec;  // three nonempty parts, class "tiny" has one sample
    CHECK_THROWS_WITH_AS(split_indices(data, spec), doctest::Contains("tiny"),
                         std::invalid_argument);
}

TEST_CASE("five folds on two balanced classes hold out one per class each") {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> normal;
    Dataset data;
    data.features.resize(10, 2);
    for (Eigen::Index r = 0; r < 10; ++r)
        for (Eigen::Index d = 0; d < 2; ++d) data.features(r, d) = normal(gen);
    for (int i = 0; i < 10; ++i) data.labels.push_back(i % 2);
    data.feature_names = {"a", "b"};
    data.class_names = {"x", "y"};

    const auto plan = make_folds(data, 5, 1);
    CHECK(plan.fold_count == 5);
    for (const auto& fold : plan.held_out) {
        CHECK(fold.size() == 2);
        int per_class[2] = {0, 0};
        for (Eigen::Index i : fold) ++per_class[data.labels[static_cast<std::size_t>(i)]];
        CHECK(per_class[0] == 1);
        CHECK(per_class[1] == 1);
    }
}

TEST_CASE("folds partition the dataset with near-equal class counts") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> normal;
    Dataset data;
    data.features.resize(15, 2);
    for (Eigen::Index r = 0; r < 15; ++r)
        for (Eigen::Index d = 0; d < 2; ++d) data.features(r, d) = normal(gen);
    for (int i = 0; i < 15; ++i) data.labels.push_back(i < 7 ? 0 : 1);  // 7 and 8
    data.feature_names = {"a", "b"};
    data.class_names = {"x", "y"};

    const auto plan = make_folds(data, 3, 4);
    std::vector<Eigen::Index> all;
    for (const auto& fold : plan.held_out) {
        CHECK(std::is_sorted(fold.begin(), fold.end()));
        long counts[2] = {0, 0};
        for (Eigen::Index i : fold) ++counts[data.labels[static_cast<std::size_t>(i)]];
        // 7 over 3 folds gives 2 or 3; 8 over 3 folds gives 2 or 3.
        for (long c : counts) {
            CHECK(c >= 2);
            CHECK(c <= 3);
        }
        all.insert(all.end(), fold.begin(), fold.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(all.size() == 15);
    for (Eigen::Index i = 0; i < 15; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);

    CHECK_THROWS_AS(make_folds(data, 1, 0), std::invalid_argument);
    CHECK_THROWS_WITH_AS(make_folds(data, 8, 0), doctest::Contains("fewer samples than folds"),
                         std::invalid_argument);
}

TEST_CASE("fold assignment is stable under row permutation") {
    std::mt19937_64 gen(31);
    std::normal_distribution<double> normal;
    Dataset data;
    data.features.resize(12, 2);
    for (Eigen::Index r = 0; r < 12; ++r)
        for (Eigen::Index d = 0; d < 2; ++d) data.features(r, d) = normal(gen);
    for (int i = 0; i < 12; ++i) data.labels.push_back(i % 2);
    data.feature_names = {"a", "b"};
    data.class_names = {"x", "y"};

    std::vector<Eigen::Index> perm(12);
    for (Eigen::Index i = 0; i < 12; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), gen);
    const auto shuffled = data.select_rows(perm);

    const auto plan_a = make_folds(data, 3, 6);
    const auto plan_b = make_folds(shuffled, 3, 6);
    for (int f = 0; f < 3; ++f) {
        CHECK(row_multiset(data, plan_a.held_out[static_cast<std::size_t>(f)]) ==
              row_multiset(shuffled, plan_b.held_out[static_cast<std::size_t>(f)]));
    }
}

}  // TEST_SUITE
