// Copyright 2026 The napt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Noise-source tag to top-level sound category. Categories follow the
// top-level branches of the AudioSet ontology:
//   0 human, 1 source-ambiguous, 2 animal, 3 sounds of things, 4 music,
//   5 natural, 6 channel/environment/background.
// Tags cover the FSDKaggle2018 label set plus common NoiseX-92 and PNL
// noise names.

#include <algorithm>
#include <map>

#include "napt/corpus.h"

namespace napt {

namespace {

const std::map<std::string, int>& table() {
  static const std::map<std::string, int> kTable = {
      // human
      {"Applause", 0}, {"Babble", 0}, {"Burping_or_eructation", 0},
      {"Cough", 0}, {"Crowd", 0}, {"Fart", 0}, {"Finger_snapping", 0},
      {"Laughter", 0}, {"Speech", 0},
      // source-ambiguous
      {"Squeak", 1}, {"Tearing", 1}, {"Crack", 1}, {"Buzz", 1},
      // animal
      {"Bark", 2}, {"Meow", 2}, {"Bird", 2}, {"Cricket", 2}, {"Frog", 2},
      {"Rooster", 2},
      // sounds of things
      {"Bus", 3}, {"Car", 3}, {"Chime", 3}, {"Computer_keyboard", 3},
      {"Destroyer_engine", 3}, {"Destroyer_operations", 3},
      {"Drawer_open_or_close", 3}, {"F16_cockpit", 3}, {"Factory", 3},
      {"Fireworks", 3}, {"Gunshot_or_gunfire", 3}, {"Keys_jangling", 3},
      {"Knock", 3}, {"Leopard", 3}, {"M109", 3}, {"Machine_gun", 3},
      {"Microwave_oven", 3}, {"Scissors", 3}, {"Shatter", 3},
      {"Telephone", 3}, {"Volvo", 3}, {"Writing", 3}, {"Buccaneer", 3},
      // music
      {"Acoustic_guitar", 4}, {"Bass_drum", 4}, {"Cello", 4},
      {"Clarinet", 4}, {"Cowbell", 4}, {"Double_bass", 4},
      {"Electric_piano", 4}, {"Flute", 4}, {"Glockenspiel", 4}, {"Gong", 4},
      {"Harmonica", 4}, {"Hi-hat", 4}, {"Oboe", 4}, {"Saxophone", 4},
      {"Snare_drum", 4}, {"Tambourine", 4}, {"Trumpet", 4},
      {"Violin_or_fiddle", 4}, {"Music", 4},
      // natural
      {"Rain", 5}, {"Thunder", 5}, {"Water", 5}, {"Wind", 5}, {"Stream", 5},
      {"Fire", 5}, {"Ocean", 5},
      // channel, environment and background
      {"White_noise", 6}, {"Pink_noise", 6}, {"Hf_channel", 6},
      {"Static", 6}, {"Hum", 6}, {"Environmental_noise", 6},
  };
  return kTable;
}

}  // namespace

int category_class(const std::string& tag) {
  const auto& t = table();
  auto it = t.find(tag);
  if (it == t.end()) throw UnmappedCategoryError(tag);
  return it->second;
}

std::vector<std::pair<std::string, int>> category_table() {
  return {table().begin(), table().end()};
}

}  // namespace napt
