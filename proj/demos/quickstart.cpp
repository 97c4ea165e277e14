// Minimal end-to-end run: generate a toy corpus, fine-tune with the ratio
// constraint, and report token accuracy against the gold tags.

#include <iostream>

#include "wskm/wskm.hpp"

int main() {
    wskm::SynthConfig cfg;
    cfg.seed = 7;
    cfg.n_per_tag = 60;
    cfg.dim = 4;
    cfg.tags = {"O", "I-LOC", "I-PER"};
    cfg.tag_means = {{0, 0, 0, 0}, {8, 0, 0, 0}, {0, 8, 0, 0}};
    cfg.noise_std = 1.0;
    cfg.o_fraction = 0.6;
    cfg.label_fraction = 0.1;
    const wskm::SynthData data = wskm::gen_synth(cfg);

    wskm::FitConfig fit_cfg;
    fit_cfg.variant = wskm::FitConfig::Variant::hard;
    fit_cfg.ratio = 0.6;
    fit_cfg.o_prototypes = 4;
    const wskm::Model model = wskm::fit_with_tag_set(data.x, data.labels, cfg.tags, fit_cfg);

    const std::vector<int> pred = wskm::predict(data.x, model);
    std::cout << "token accuracy: " << wskm::token_accuracy(data.gold, pred) << "\n";
    std::cout << "rounds: " << model.trace.size()
              << ", final objective: " << model.trace.back().objective << "\n";
    return 0;
}
