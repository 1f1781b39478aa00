#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace synthetic {

namespace {

using polite::Lang;

struct Vocabulary {
  std::vector<std::string> neutral;
  std::vector<std::string> polite;
  std::vector<std::string> rude;
  std::string joiner;
  std::vector<std::string> enders;
};

const Vocabulary& vocabulary(Lang lang) {
  static const Vocabulary en{
      {"the", "game", "last", "night", "was", "long", "bus", "late", "again", "coffee", "shop",
       "downtown", "opens", "at", "noon", "weather", "looks", "cloudy", "today", "new", "phone",
       "battery", "lasts", "two", "days", "traffic", "on", "bridge", "train", "station", "crowded",
       "lunch", "menu", "changed", "movie", "tickets", "sold", "out", "river", "park", "quiet",
       "morning", "meeting", "moved", "tuesday", "office", "printer", "broken", "store", "closes",
       "early"},
      {"thanks", "thank you", "thx", "appreciate", "grateful", "best wishes", "have a nice day",
       "hope everyone", "sir", "madam", "dr.", "mrs."},
      {"damn", "shit", "crap", "wtf", "fuck", "bastard", "asshole", "stfu", "dammit"},
      " ",
      {".", "!", "", "..."}};
  static const Vocabulary zh{
      {"今天", "天气", "有点", "阴", "地铁", "人", "很多", "咖啡", "店", "中午", "开门", "电影",
       "票", "卖完", "了", "公园", "河边", "安静", "早上", "会议", "改到", "周二", "办公室",
       "打印机", "坏", "商店", "关门", "早", "手机", "电池", "两天", "晚饭", "吃", "面条", "周末",
       "下雨", "火车", "站", "排队", "新闻", "说"},
      {"谢谢", "感谢", "多谢", "祝你", "祝大家", "希望大家", "先生", "女士"},
      {"他妈的", "妈的", "傻逼", "滚蛋", "混蛋", "王八蛋"},
      "",
      {"。", "！", "", "……"}};
  return lang == Lang::en ? en : zh;
}

int clip_score(double v) { return std::clamp(static_cast<int>(std::lround(v)), -3, 3); }

}  // namespace

Data generate(const Options& o) {
  const auto& vocab = vocabulary(o.lang);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](const std::vector<std::string>& v) -> const std::string& {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };

  Data data;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < o.posts; ++i) {
    data.latent.push_back(normal(rng));
    ids.push_back((o.lang == Lang::en ? "en" : "zh") + std::to_string(i));
  }

  data.annotations = polite::AnnotationTable(ids, {"a1", "a2", "a3", "a4"});
  std::vector<std::vector<std::size_t>> rated(4);
  for (std::size_t i = 0; i < o.posts; ++i) {
    const std::size_t first = o.full_panel ? 0 : (i % 2) * 2;
    const std::size_t last = o.full_panel ? 4 : first + 2;
    for (std::size_t a = first; a < last; ++a) {
      data.annotations.set(i, a, clip_score(1.5 * data.latent[i] + o.annotator_noise * normal(rng)));
      rated[a].push_back(i);
    }
  }

  // The class follows the documented rule (per-annotator z-scores with
  // sample SD, averaged per post, quarters by (score, id)) and markers are
  // seeded on the class rather than on the latent value.
  std::vector<double> zsum(o.posts, 0.0);
  std::vector<int> zcount(o.posts, 0);
  for (std::size_t a = 0; a < 4; ++a) {
    double m = 0;
    for (auto i : rated[a]) m += *data.annotations.at(i, a);
    m /= double(rated[a].size());
    double ss = 0;
    for (auto i : rated[a]) ss += (*data.annotations.at(i, a) - m) * (*data.annotations.at(i, a) - m);
    const double sd = std::sqrt(ss / double(rated[a].size() - 1));
    for (auto i : rated[a]) {
      zsum[i] += (*data.annotations.at(i, a) - m) / sd;
      ++zcount[i];
    }
  }
  std::vector<std::size_t> order(o.posts);
  for (std::size_t i = 0; i < o.posts; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double za = zsum[a] / zcount[a], zb = zsum[b] / zcount[b];
    return za != zb ? za < zb : ids[a] < ids[b];
  });
  data.cls.assign(o.posts, 0);
  const std::size_t quarter = o.posts / 4;
  for (std::size_t k = 0; k < quarter; ++k) {
    data.cls[order[k]] = -1;
    data.cls[order[o.posts - 1 - k]] = 1;
  }

  std::vector<polite::Post> posts;
  for (std::size_t i = 0; i < o.posts; ++i) {
    std::vector<std::string> words;
    const auto len = std::uniform_int_distribution<std::size_t>(5, 12)(rng);
    for (std::size_t k = 0; k < len; ++k) words.push_back(pick(vocab.neutral));
    auto insert = [&](const std::string& marker) {
      const auto at = std::uniform_int_distribution<std::size_t>(0, words.size())(rng);
      words.insert(words.begin() + std::ptrdiff_t(at), marker);
    };
    if (data.cls[i] != 0 && unit(rng) < o.marker_rate) {
      const auto& markers = data.cls[i] > 0 ? vocab.polite : vocab.rude;
      insert(pick(markers));
      if (unit(rng) < 0.5) insert(pick(markers));
    }
    if (unit(rng) < o.stray_rate) insert(pick(unit(rng) < 0.5 ? vocab.polite : vocab.rude));
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : vocab.joiner) + w;
    text += pick(vocab.enders);
    posts.push_back({ids[i], o.lang, text});
  }
  data.corpus = polite::Corpus(std::move(posts));
  return data;
}

}  // namespace synthetic
