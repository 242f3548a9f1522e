// Builds the committed reference for the noiseless helix run: the expected
// estimate and its sampling spread at every interior test point, from the
// continuous operator on the curve.
#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hermnet/experiments.hpp"

using namespace hermnet;

int main(int argc, char** argv) {
    CLI::App app{"Continuous-operator oracle for the helix experiment"};
    double n = 64.0;
    int M = 256;
    int points = 2048;
    double z = 5.0;
    std::string out = "helix_oracle.json";
    app.add_option("--n", n, "Degree parameter");
    app.add_option("--M", M, "Training size the spread is computed for");
    app.add_option("--test-points", points, "Equidistant test points");
    app.add_option("--z", z, "Standard deviations allowed above the bias");
    app.add_option("--out", out, "Output JSON file");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto table = compile_kernel(n, 1);
        const auto curve = HelixSpec::curve();
        const double volume = HelixSpec::length();
        double max_bias = 0.0, max_sd = 0.0, threshold = 0.0;
        for (double t : helix_test_grid(points)) {
            if (!HelixSpec::interior(t)) continue;
            const auto x = HelixSpec::point(t);
            const auto m = curve_operator_moments(curve, helix_target, table, 1.0, x, volume);
            const double bias = std::abs(m.mean - helix_target(t));
            const double sd = std::sqrt(std::max(0.0, m.second - m.mean * m.mean) / M);
            max_bias = std::max(max_bias, bias);
            max_sd = std::max(max_sd, sd);
            threshold = std::max(threshold, bias + z * sd);
        }
        nlohmann::json j{{"n", n},         {"M", M},           {"test_points", points}, {"z", z},
                         {"max_bias", max_bias}, {"max_sd", max_sd}, {"threshold", threshold}};
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot write " + out);
        f << j.dump(2) << '\n';
        std::cout << j.dump(2) << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
