#include "background.hpp"

#include <algorithm>
#include <iterator>
#include <utility>

namespace sumrecom::detail {
namespace {

struct Entry {
  std::string_view term;
  std::int64_t count;
};

// Sorted by term for binary search.
constexpr Entry kTable[] = {
    {"according", 310}, {"added", 420},     {"administration", 360}, {"after", 900},
    {"against", 520},   {"american", 610},  {"another", 380},    {"area", 330},
    {"around", 410},    {"back", 540},      {"big", 280},        {"business", 390},
    {"called", 300},    {"case", 350},      {"city", 520},       {"company", 640},
    {"country", 450},   {"court", 410},     {"day", 620},        {"days", 380},
    {"department", 300},{"development", 260},{"don", 290},       {"early", 340},
    {"economic", 310},  {"end", 400},       {"even", 480},       {"first", 1100},
    {"former", 330},    {"found", 310},     {"get", 470},        {"give", 240},
    {"go", 420},        {"good", 360},      {"government", 780}, {"group", 450},
    {"help", 300},      {"high", 330},      {"home", 420},       {"house", 500},
    {"including", 470}, {"information", 250},{"international", 300},{"know", 330},
    {"last", 980},      {"law", 320},       {"leader", 280},     {"life", 300},
    {"like", 560},      {"local", 290},     {"long", 400},       {"made", 510},
    {"make", 430},      {"man", 380},       {"many", 560},       {"market", 380},
    {"may", 610},       {"million", 690},   {"minister", 310},   {"month", 330},
    {"much", 410},      {"national", 480},  {"never", 300},      {"new", 1500},
    {"news", 350},      {"next", 380},      {"number", 330},     {"officials", 480},
    {"old", 300},       {"one", 1400},      {"part", 330},       {"party", 390},
    {"people", 920},    {"percent", 700},   {"place", 280},      {"police", 470},
    {"political", 360}, {"president", 820}, {"program", 330},    {"public", 420},
    {"report", 380},    {"said", 3900},     {"say", 420},        {"school", 330},
    {"second", 390},    {"see", 330},       {"since", 540},      {"state", 880},
    {"states", 600},    {"still", 470},     {"support", 300},    {"system", 330},
    {"take", 380},      {"three", 620},     {"time", 950},       {"told", 480},
    {"two", 1200},      {"united", 560},    {"us", 400},         {"war", 430},
    {"way", 420},       {"week", 560},      {"well", 500},       {"work", 480},
    {"world", 620},     {"year", 1300},     {"years", 1000},     {"york", 360},
};

}  // namespace

std::int64_t background_count(std::string_view term) {
  auto it = std::lower_bound(std::begin(kTable), std::end(kTable), term,
                             [](const Entry& e, std::string_view t) { return e.term < t; });
  if (it != std::end(kTable) && it->term == term) return it->count;
  return 0;
}

}  // namespace sumrecom::detail
