// Minimal library use: parse a system, run HANN-1 from one anchor, polish
// with Newton and print the root.
#include "hann/hann.hpp"

#include <iostream>

int main(int argc, char** argv) {
    const std::string src = R"(vars: x, y
x^2 + y^2 = 1
x = y
domain: x in [-2, 2]
domain: y in [-2, 2]
)";
    auto sys = std::make_shared<const hann::System>(hann::parse_system(src));

    hann::TrainConfig cfg;
    cfg.hidden = {20, 20};
    cfg.collocation = 200;
    cfg.optimizer.max_iters = argc > 1 ? std::stoi(argv[1]) : 2000;

    const hann::Vector x0 = hann::bench_data::vec({1.5, 0.5});
    const hann::SolveResult r = hann::hann1(sys, x0, cfg);
    const hann::SolveResult p = hann::newton_refine(*sys, r.x_final);
    std::cout << "hann1   x = (" << r.x_final.transpose() << ")  residual " << r.residual << '\n'
              << "refined x = (" << p.x_final.transpose() << ")  residual " << p.residual << '\n';
    return p.residual < 1e-8 ? 0 : 1;
}
