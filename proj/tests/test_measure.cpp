#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "affdim/errors.hpp"
#include "affdim/measure.hpp"

#include <cmath>
#include <functional>

using namespace affdim;

namespace {

ShiftMeasure lopsided_markov() {
    Mat p(2, 2);
    p << 0.9, 0.1, 0.2, 0.8;
    return ShiftMeasure::markov(p);
}

// sum of cylinder masses over all words of length n
double total_mass(const ShiftMeasure& mu, int n) {
    double total = 0.0;
    Word w(static_cast<std::size_t>(n), 0);
    std::function<void(int)> rec = [&](int pos) {
        if (pos == n) {
            total += cylinder_prob(mu, w);
            return;
        }
        for (int s = 0; s < mu.alphabet_size(); ++s) {
            w[static_cast<std::size_t>(pos)] = s;
            rec(pos + 1);
        }
    };
    rec(0);
    return total;
}

}  // namespace

TEST_CASE("entropy: closed forms") {
    CHECK(entropy(ShiftMeasure::bernoulli({0.5, 0.5})) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(entropy(ShiftMeasure::bernoulli({1.0, 0.0})) == doctest::Approx(0.0).epsilon(1e-14));
    Mat uniform(2, 2);
    uniform << 0.5, 0.5, 0.5, 0.5;
    CHECK(entropy(ShiftMeasure::markov(uniform)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("cylinder_prob: bernoulli and markov") {
    ShiftMeasure mu = ShiftMeasure::bernoulli({0.3, 0.7});
    CHECK(cylinder_prob(mu, {0, 1, 1}) == doctest::Approx(0.147).epsilon(1e-14));
    ShiftMeasure half = ShiftMeasure::bernoulli({0.5, 0.5});
    CHECK(cylinder_prob(half, Word(11, 1)) == doctest::Approx(std::pow(2.0, -11)).epsilon(1e-13));

    ShiftMeasure mk = lopsided_markov();
    CHECK(mk.stationary()(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
    CHECK(cylinder_prob(mk, {0, 0}) == doctest::Approx(0.6).epsilon(1e-11));
}

TEST_CASE("cylinder masses sum to one up to length 8") {
    for (const auto& mu : {ShiftMeasure::bernoulli({0.3, 0.7}), lopsided_markov()})
        for (int n = 1; n <= 8; ++n) CHECK(std::abs(total_mass(mu, n) - 1.0) < 1e-9);
}

TEST_CASE("sample_word: atomic, frequency, deterministic chain") {
    Rng rng(1);
    Word atomic = sample_word(ShiftMeasure::bernoulli({1.0, 0.0}), 5, rng);
    CHECK(atomic == Word{0, 0, 0, 0, 0});

    Word big = sample_word(ShiftMeasure::bernoulli({0.5, 0.5}), 1000000, rng);
    double ones = 0;
    for (int s : big) ones += s;
    const double freq = ones / 1e6;
    CHECK(std::abs(freq - 0.5) < 3.0 * 0.5 / 1000.0);  // 3 sigma

    Mat flip(2, 2);
    flip << 0.0, 1.0, 1.0, 0.0;
    ShiftMeasure alternating = ShiftMeasure::markov(flip);
    Word w = sample_word(alternating, 10, rng);
    for (std::size_t k = 1; k < w.size(); ++k) CHECK(w[k] == 1 - w[k - 1]);
}

TEST_CASE("sample_word: identical seeds give identical words") {
    ShiftMeasure mu = lopsided_markov();
    Rng a(77), b(77);
    CHECK(sample_word(mu, 1000, a) == sample_word(mu, 1000, b));
}

TEST_CASE("regularity: bernoulli is exactly multiplicative") {
    MeasureRegularity reg = regularity(ShiftMeasure::bernoulli({0.3, 0.7}));
    CHECK(reg.quasi_bernoulli);
    CHECK(reg.submultiplicative);
    CHECK(reg.constant_c == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("regularity: markov constant from the transition/stationary ratio") {
    // ratios P_ij / pi_j: 1.35, 0.3, 0.3, 2.4 -> two-sided constant 10/3
    MeasureRegularity reg = regularity(lopsided_markov());
    CHECK(reg.quasi_bernoulli);
    CHECK(reg.constant_c == doctest::Approx(10.0 / 3.0).epsilon(1e-10));

    Mat uniform(2, 2);
    uniform << 0.5, 0.5, 0.5, 0.5;
    CHECK(regularity(ShiftMeasure::markov(uniform)).constant_c ==
          doctest::Approx(1.0).epsilon(1e-10));

    Mat zeros(2, 2);
    zeros << 0.0, 1.0, 0.5, 0.5;
    MeasureRegularity z = regularity(ShiftMeasure::markov(zeros));
    CHECK_FALSE(z.quasi_bernoulli);
    CHECK(z.submultiplicative);
    CHECK(z.constant_c >= 1.0);
}

TEST_CASE("regularity: two-sided cylinder bound holds exhaustively to length 4") {
    ShiftMeasure mu = lopsided_markov();
    MeasureRegularity reg = regularity(mu);
    const double c = reg.constant_c;
    std::vector<Word> words;
    std::function<void(Word&, int)> gen = [&](Word& w, int depth) {
        if (!w.empty()) words.push_back(w);
        if (depth == 4) return;
        for (int s = 0; s < 2; ++s) {
            w.push_back(s);
            gen(w, depth + 1);
            w.pop_back();
        }
    };
    Word scratch;
    gen(scratch, 0);
    for (const auto& u : words)
        for (const auto& v : words) {
            Word uv = u;
            uv.insert(uv.end(), v.begin(), v.end());
            const double joint = cylinder_prob(mu, uv);
            const double split = cylinder_prob(mu, u) * cylinder_prob(mu, v);
            CHECK(joint <= c * split * (1.0 + 1e-12));
            CHECK(joint >= split / c * (1.0 - 1e-12));
        }
}

TEST_CASE("empirical entropy converges (Shannon-McMillan-Breiman)") {
    for (const auto& mu : {ShiftMeasure::bernoulli({0.3, 0.7}), lopsided_markov()}) {
        const double h = entropy(mu);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng rng(seed);
            Word w = sample_word(mu, 100000, rng);
            const double emp = -log_cylinder_prob(mu, w) / 1e5;
            CHECK(std::abs(emp - h) < 0.01);
        }
    }
}

TEST_CASE("measure validation") {
    CHECK_THROWS_AS(ShiftMeasure::bernoulli({0.5, 0.6}), ValidationError);
    CHECK_THROWS_AS(ShiftMeasure::bernoulli({-0.1, 1.1}), ValidationError);
    CHECK_THROWS_AS(ShiftMeasure::bernoulli({}), ValidationError);

    Mat bad_rows(2, 2);
    bad_rows << 0.5, 0.4, 0.5, 0.5;
    CHECK_THROWS_AS(ShiftMeasure::markov(bad_rows), ValidationError);

    Mat reducible(2, 2);
    reducible << 1.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(ShiftMeasure::markov(reducible), ValidationError);
}
