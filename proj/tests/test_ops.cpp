#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support/oracles.hpp"
#include "tpa/gradcheck.hpp"
#include "tpa/ops.hpp"
#include "tpa/rng.hpp"

#include <cmath>

using namespace tpa;

TEST_CASE("linear forward examples") {
    Tensor W = Tensor::from({2, 2}, {1, 2, 3, 4});
    Tensor b0 = Tensor::zeros({2});

    Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
    Tensor y = linear(eye, W, b0);
    CHECK(y.at(0, 0) == 1.0);
    CHECK(y.at(0, 1) == 2.0);
    CHECK(y.at(1, 0) == 3.0);
    CHECK(y.at(1, 1) == 4.0);

    Tensor x = Tensor::from({1, 2}, {1, 1});
    Tensor b1 = Tensor::from({2}, {1, 1});
    Tensor y2 = linear(x, W, b1);
    CHECK(y2.at(0, 0) == 5.0);
    CHECK(y2.at(0, 1) == 7.0);

    CHECK_THROWS_AS(linear(Tensor::from({1, 3}, {1, 2, 3}), W, b0), std::invalid_argument);
}

TEST_CASE("linear bias gradient is the column sum of the upstream gradient") {
    Tensor x = Tensor::zeros({3, 2});
    Tensor W = Tensor::from({2, 2}, {1, 2, 3, 4}, true);
    Tensor b = Tensor::zeros({2}, true);
    Tensor g = Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6});
    Tape tape;
    {
        TapeScope scope(tape);
        Tensor y = linear(x, W, b);
        for (double v : y.value()) CHECK(v == 0.0);
        tape.backward(sum(mul(y, g)));
    }
    CHECK(b.grad()[0] == 9.0);  // 1 + 3 + 5
    CHECK(b.grad()[1] == 12.0); // 2 + 4 + 6
    // x = 0 means dW picks up nothing
    for (double v : W.grad()) CHECK(v == 0.0);
}

TEST_CASE("conv1d matches the nested-loop oracle") {
    Tensor x = Tensor::full({4, 1}, 1.0);
    Tensor k = Tensor::from({3, 1, 1}, {1, 1, 1});
    Tensor y = conv1d(x, k, Padding::same, 1);
    CHECK(y.val(0) == 2.0);
    CHECK(y.val(1) == 3.0);
    CHECK(y.val(2) == 3.0);
    CHECK(y.val(3) == 2.0);

    Rng rng(7);
    std::vector<double> xd(10 * 3), kd(3 * 3 * 2);
    for (double& v : xd) v = rng.normal();
    for (double& v : kd) v = rng.normal();
    for (bool causal : {false, true}) {
        for (int dil : {1, 2}) {
            Tensor xi = Tensor::from({10, 3}, xd);
            Tensor ki = Tensor::from({3, 3, 2}, kd);
            Tensor out = conv1d(xi, ki, causal ? Padding::causal : Padding::same, dil);
            auto ref = oracle::conv1d(xd, 10, 3, kd, 3, 2, causal, dil);
            for (std::size_t i = 0; i < ref.size(); ++i)
                CHECK(out.val(i) == doctest::Approx(ref[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("conv1d identity kernel reproduces the input") {
    Rng rng(3);
    std::vector<double> xd(6 * 2);
    for (double& v : xd) v = rng.normal();
    Tensor x = Tensor::from({6, 2}, xd);
    // center tap is the identity over channels
    std::vector<double> kd(3 * 2 * 2, 0.0);
    kd[(1 * 2 + 0) * 2 + 0] = 1.0;
    kd[(1 * 2 + 1) * 2 + 1] = 1.0;
    Tensor k = Tensor::from({3, 2, 2}, kd);
    Tensor y = conv1d(x, k, Padding::same, 1);
    for (std::size_t i = 0; i < xd.size(); ++i) CHECK(y.val(i) == xd[i]);
}

TEST_CASE("causal conv output at t=0 ignores later frames") {
    Rng rng(11);
    std::vector<double> xd(5 * 2), kd(3 * 2 * 2);
    for (double& v : xd) v = rng.normal();
    for (double& v : kd) v = rng.normal();
    Tensor y0 = conv1d(Tensor::from({5, 2}, xd), Tensor::from({3, 2, 2}, kd), Padding::causal, 1);
    auto xd2 = xd;
    for (std::size_t i = 2; i < xd2.size(); ++i) xd2[i] += 17.0; // frames 1..4
    Tensor y1 = conv1d(Tensor::from({5, 2}, xd2), Tensor::from({3, 2, 2}, kd), Padding::causal, 1);
    CHECK(y0.val(0) == y1.val(0));
    CHECK(y0.val(1) == y1.val(1));
    CHECK(y0.val(2) != y1.val(2));
}

TEST_CASE("conv1d validation") {
    Tensor x = Tensor::full({4, 1}, 1.0);
    CHECK_THROWS_AS(conv1d(x, Tensor::full({2, 1, 1}, 1.0), Padding::same, 1),
                    std::invalid_argument); // even kernel, same padding
    CHECK_THROWS_AS(conv1d(x, Tensor::full({3, 1, 1}, 1.0), Padding::same, 0),
                    std::invalid_argument); // dilation < 1
    CHECK_THROWS_AS(conv1d(x, Tensor::full({3, 2, 1}, 1.0), Padding::same, 1),
                    std::invalid_argument); // channel mismatch
}

TEST_CASE("reduce_time examples") {
    Tensor same = Tensor::from({3, 2}, {1.5, -2.0, 1.5, -2.0, 1.5, -2.0});
    Tensor m = reduce_time(same, Reduce::mean);
    CHECK(m.val(0) == 1.5);
    CHECK(m.val(1) == -2.0);

    Tensor x = Tensor::from({3, 1}, {1, 3, 2}, true);
    Tape tape;
    {
        TapeScope scope(tape);
        Tensor mx = reduce_time(x, Reduce::max);
        CHECK(mx.val(0) == 3.0);
        tape.backward(sum(mx));
    }
    CHECK(x.grad()[0] == 0.0);
    CHECK(x.grad()[1] == 1.0); // routed to the argmax row
    CHECK(x.grad()[2] == 0.0);

    Tensor mm = reduce_time(Tensor::from({2, 1}, {2, 4}), Reduce::mean);
    CHECK(mm.val(0) == 3.0);

    // tie routes to the first maximal index
    Tensor t = Tensor::from({3, 1}, {5, 5, 1}, true);
    Tape tape2;
    {
        TapeScope scope(tape2);
        tape2.backward(sum(reduce_time(t, Reduce::max)));
    }
    CHECK(t.grad()[0] == 1.0);
    CHECK(t.grad()[1] == 0.0);
}

TEST_CASE("cosine similarity examples and range") {
    Tensor a = Tensor::from({3}, {0.3, -1.2, 2.0});
    CHECK(cosine_similarity(a, a).item() == doctest::Approx(1.0).epsilon(1e-12));

    Tensor ex = Tensor::from({2}, {1, 0});
    Tensor ey = Tensor::from({2}, {0, 1});
    CHECK(cosine_similarity(ex, ey).item() == 0.0);

    Tensor b = Tensor::from({2}, {1, 1});
    CHECK(cosine_similarity(ex, b).item() ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::fabs(cosine_similarity(ex, b).item() - 0.7071) < 5e-5);

    // zero vector is eps-guarded
    Tensor z = Tensor::zeros({2});
    CHECK(cosine_similarity(z, b).item() == 0.0);

    Rng rng(19);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> av(4), bv(4);
        for (double& v : av) v = rng.normal() * std::pow(10.0, rng.uniform_int(6) - 3);
        for (double& v : bv) v = rng.normal() * std::pow(10.0, rng.uniform_int(6) - 3);
        double c = cosine_similarity(Tensor::from({4}, av), Tensor::from({4}, bv)).item();
        CHECK(c >= -1.0 - 1e-12);
        CHECK(c <= 1.0 + 1e-12);
        CHECK(c == doctest::Approx(oracle::cosine(av, bv)).epsilon(1e-12));
    }
}

TEST_CASE("softmax examples and invariances") {
    Tensor eq = Tensor::from({4}, {0.3, 0.3, 0.3, 0.3});
    Tensor p = softmax(eq, 0.1);
    for (int i = 0; i < 4; ++i) CHECK(p.val(static_cast<std::size_t>(i)) == doctest::Approx(0.25).epsilon(1e-14));

    Tensor s = Tensor::from({2}, {1, 0});
    Tensor p2 = softmax(s, 1.0);
    const double e = std::exp(1.0);
    CHECK(p2.val(0) == doctest::Approx(e / (1 + e)).epsilon(1e-14));
    CHECK(p2.val(1) == doctest::Approx(1 / (1 + e)).epsilon(1e-14));
    CHECK(std::fabs(p2.val(0) - 0.7311) < 5e-5);
    CHECK(std::fabs(p2.val(1) - 0.2689) < 5e-5);

    Tensor p3 = softmax(Tensor::from({3}, {0.5, 0.1, 0.2}), 0.001);
    CHECK(p3.val(0) > 0.999);

    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> sv(5);
        for (double& v : sv) v = rng.range(-1, 1);
        const double tau = std::pow(10.0, rng.range(-2, 1));
        Tensor probs = softmax(Tensor::from({5}, sv), tau);
        double total = 0.0;
        std::size_t amax_s = 0, amax_p = 0;
        for (std::size_t i = 0; i < 5; ++i) {
            total += probs.val(i);
            if (sv[i] > sv[amax_s]) amax_s = i;
            if (probs.val(i) > probs.val(amax_p)) amax_p = i;
        }
        CHECK(std::fabs(total - 1.0) <= 1e-12);
        CHECK(amax_s == amax_p); // temperature never changes the argmax

        // invariant to adding a constant to all scores
        std::vector<double> shifted(sv);
        for (double& v : shifted) v += 0.75;
        Tensor probs2 = softmax(Tensor::from({5}, shifted), tau);
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(probs2.val(i) == doctest::Approx(probs.val(i)).epsilon(1e-12));

        auto ref = oracle::softmax(sv, tau);
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(probs.val(i) == doctest::Approx(ref[i]).epsilon(1e-13));
    }
}

TEST_CASE("grad_check passes on a quadratic") {
    Tensor x = Tensor::from({1}, {3.0}, true);
    GradCheckResult r = grad_check([](const Tensor& t) { return sum(mul(t, t)); }, x, 1e-8);
    CHECK(r.pass);
    CHECK(r.max_rel_err < 1e-8);
}

TEST_CASE("grad_check excludes a relu probed exactly at zero") {
    Tensor x = Tensor::from({3}, {0.0, 1.0, -1.0}, true);
    GradCheckResult r = grad_check([](const Tensor& t) { return sum(relu(t)); }, x, 1e-4);
    CHECK(r.pass);
    CHECK(r.excluded == 1);
    CHECK(r.checked == 2);
}

TEST_CASE("registered op gradients pass at tol 1e-4 over 10 seeds") {
    for (const GradCase& c : builtin_op_cases()) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            GradCheckResult r = c.run(seed, 1e-4);
            INFO(c.name << " seed " << seed << ": " << r.detail);
            CHECK(r.pass);
        }
    }
}

TEST_CASE("whole-chain composition matches finite differences") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(mix_seed(seed, 0xc0de));
        auto rand_tensor = [&rng](std::vector<int> shape) {
            std::size_t n = 1;
            for (int d : shape) n *= static_cast<std::size_t>(d);
            std::vector<double> v(n);
            for (double& x : v) x = rng.normal() * 0.7;
            return Tensor::from(std::move(shape), std::move(v), true);
        };
        Tensor x = rand_tensor({2, 6});
        Tensor W1 = rand_tensor({6, 5});
        Tensor b1 = rand_tensor({5});
        Tensor W2 = rand_tensor({5, 3});
        Tensor b2 = rand_tensor({3});
        auto chain = [](const std::vector<Tensor>& in) {
            Tensor h = relu(linear(in[0], in[1], in[2]));
            return mean(sigmoid(linear(h, in[3], in[4])));
        };
        GradCheckResult r = grad_check_multi(chain, {x, W1, b1, W2, b2}, 1e-4);
        INFO("seed " << seed << ": " << r.detail);
        CHECK(r.pass);
        CHECK(r.checked > 0);
    }
}

TEST_CASE("grad_check is deterministic for a fixed seed") {
    const std::vector<GradCase> cases = builtin_op_cases();
    GradCheckResult a = cases.front().run(42, 1e-4);
    GradCheckResult b = cases.front().run(42, 1e-4);
    CHECK(a.max_rel_err == b.max_rel_err);
    CHECK(a.checked == b.checked);
}
