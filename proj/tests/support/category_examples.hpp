#pragma once

// Example surface forms per PoliteLex category, as published alongside the
// lexicon. Templated Chinese forms are given as a concrete realization.

#include <string>
#include <vector>

namespace fixtures {

struct CategoryExamples {
  std::string category;
  std::vector<std::string> en;
  std::vector<std::string> zh;
};

inline const std::vector<CategoryExamples>& category_examples() {
  static const std::vector<CategoryExamples> rows{
      {"apologetic", {"my bad", "sorry"}, {"对不起"}},
      {"you_honorific", {"your honor", "ur majesty"}, {"您"}},
      {"you_direct", {"you", "u"}, {"你"}},
      {"hedge", {"doubtful", "imo"}, {"也许", "没准儿"}},
      {"gratitude", {"thanks", "thx"}, {"谢谢", "鸣谢", "感谢", "重谢"}},
      {"taboo", {"dammit", "fuck"}, {"他妈的"}},
      {"best_wishes", {"have a great day"}, {"您好"}},
      {"praise", {"awesome", "bravo"}, {"真棒"}},
      {"indirect_btw", {"by the way", "btw"}, {"对了", "说起来", "话说"}},
      {"please", {"please", "pls", "plz"}, {"请"}},
      {"start_please", {"please"}, {"请"}},
      {"emergency", {"asap", "right now"}, {"立刻", "马上"}},
      {"honorifics", {"Mr.", "Prof."}, {"令尊", "令堂", "令兄"}},
      {"greeting", {"Hey", "Hi", "Hello"}, {"嗨", "哈喽", "哈罗", "嘿"}},
      {"promise", {"i promise", "must", "surely"}, {"肯定", "绝对"}},
      {"start_so", {"So,"}, {"那"}},
      {"factuality", {"in fact", "actually"}, {"其实", "说实话", "讲真"}},
      {"could_you", {"could you", "would u"}, {"你想不想"}},
      {"can_you", {"can you", "will u"}, {"你可以去吗？"}},
      {"start_question", {"what", "why"}, {"为什么", "怎么样", "咋办"}},
      {"ingroup_ident", {"mate", "bro", "homie"}, {"咱", "咱们"}},
      {"first_person_plural", {"we", "our", "us", "ours"}, {"我们"}},
      {"first_person_singular", {"i", "my", "mine", "me"}, {"我", "俺"}},
      {"together", {"together"}, {"一起", "一同"}},
      {"start_i", {"i"}, {"我"}},
      {"start_you", {"you", "u"}, {"你"}},
  };
  return rows;
}

}  // namespace fixtures
