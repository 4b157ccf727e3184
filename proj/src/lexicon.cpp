#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "semfilter/error.hpp"
#include "semfilter/prompt.hpp"

namespace semfilter {

namespace {

// English stop words (the list commonly shipped with NLP toolkits).
constexpr const char* kStopWords[] = {
    "i",          "me",        "my",       "myself",   "we",        "our",       "ours",     "ourselves",
    "you",        "you're",    "you've",   "you'll",   "you'd",     "your",      "yours",    "yourself",
    "yourselves", "he",        "him",      "his",      "himself",   "she",       "she's",    "her",
    "hers",       "herself",   "it",       "it's",     "its",       "itself",    "they",     "them",
    "their",      "theirs",    "themselves", "what",   "which",     "who",       "whom",     "this",
    "that",       "that'll",   "these",    "those",    "am",        "is",        "are",      "was",
    "were",       "be",        "been",     "being",    "have",      "has",       "had",      "having",
    "do",         "does",      "did",      "doing",    "a",         "an",        "the",      "and",
    "but",        "if",        "or",       "because",  "as",        "until",     "while",    "of",
    "at",         "by",        "for",      "with",     "about",     "against",   "between",  "into",
    "through",    "during",    "before",   "after",    "above",     "below",     "to",       "from",
    "up",         "down",      "in",       "out",      "on",        "off",       "over",     "under",
    "again",      "further",   "then",     "once",     "here",      "there",     "when",     "where",
    "why",        "how",       "all",      "any",      "both",      "each",      "few",      "more",
    "most",       "other",     "some",     "such",     "no",        "nor",       "not",      "only",
    "own",        "same",      "so",       "than",     "too",       "very",      "s",        "t",
    "can",        "will",      "just",     "don",      "don't",     "should",    "should've", "now",
    "d",          "ll",        "m",        "o",        "re",        "ve",        "y",        "ain",
    "aren",       "aren't",    "couldn",   "couldn't", "didn",      "didn't",    "doesn",    "doesn't",
    "hadn",       "hadn't",    "hasn",     "hasn't",   "haven",     "haven't",   "isn",      "isn't",
    "ma",         "mightn",    "mightn't", "mustn",    "mustn't",   "needn",     "needn't",  "shan",
    "shan't",     "shouldn",   "shouldn't", "wasn",    "wasn't",    "weren",     "weren't",  "won",
    "won't",      "wouldn",    "wouldn't",
};

constexpr std::pair<const char*, const char*> kIrregularLemmas[] = {
    {"children", "child"}, {"men", "man"},       {"women", "woman"},    {"feet", "foot"},
    {"teeth", "tooth"},    {"mice", "mouse"},    {"geese", "goose"},    {"oxen", "ox"},
    {"leaves", "leaf"},    {"knives", "knife"},  {"wives", "wife"},     {"shelves", "shelf"},
    {"wolves", "wolf"},    {"halves", "half"},   {"lives", "life"},     {"loaves", "loaf"},
    {"buses", "bus"},      {"glasses", "glass"}, {"boxes", "box"},      {"dishes", "dish"},
    {"ran", "run"},        {"sat", "sit"},       {"stood", "stand"},    {"held", "hold"},
    {"wore", "wear"},      {"worn", "wear"},     {"ate", "eat"},        {"eaten", "eat"},
    {"drank", "drink"},    {"drunk", "drink"},   {"rode", "ride"},      {"ridden", "ride"},
    {"drove", "drive"},    {"driven", "drive"},  {"flew", "fly"},       {"flown", "fly"},
    {"swam", "swim"},      {"threw", "throw"},   {"thrown", "throw"},   {"caught", "catch"},
    {"seen", "see"},       {"took", "take"},     {"taken", "take"},     {"gave", "give"},
    {"given", "give"},     {"made", "make"},     {"went", "go"},        {"gone", "go"},
    {"came", "come"},      {"lay", "lie"},       {"lain", "lie"},       {"slept", "sleep"},
    {"fell", "fall"},      {"fallen", "fall"},   {"grew", "grow"},      {"grown", "grow"},
    {"hung", "hang"},      {"told", "tell"},     {"said", "say"},       {"thought", "think"},
    {"knew", "know"},      {"known", "know"},    {"found", "find"},     {"wrote", "write"},
    {"written", "write"},  {"bought", "buy"},    {"brought", "bring"},  {"built", "build"},
    {"better", "good"},    {"best", "good"},     {"worse", "bad"},      {"worst", "bad"},
    {"kept", "keep"},      {"felt", "feel"},     {"began", "begin"},    {"begun", "begin"},
    {"shown", "show"},     {"spoke", "speak"},   {"spoken", "speak"},   {"broke", "break"},
    {"broken", "break"},   {"chose", "choose"},  {"chosen", "choose"},  {"lit", "light"},
    {"met", "meet"},       {"paid", "pay"},      {"sent", "send"},      {"spent", "spend"},
    {"stuck", "stick"},    {"struck", "strike"}, {"taught", "teach"},   {"won", "win"},
    {"dying", "die"},      {"lying", "lie"},     {"tying", "tie"},      {"data", "data"},
    {"news", "news"},      {"series", "series"}, {"species", "species"}, {"scissors", "scissors"},
    {"pants", "pants"},    {"jeans", "jeans"},   {"shorts", "shorts"},  {"clothes", "clothes"},
    {"people", "people"},  {"police", "police"}, {"sheep", "sheep"},    {"fish", "fish"},
    {"deer", "deer"},      {"bus", "bus"},       {"gas", "gas"},        {"grass", "grass"},
    {"glass", "glass"},    {"class", "class"},   {"dress", "dress"},    {"this", "this"},
};

constexpr const char* kNouns[] = {
    "person", "people", "man", "woman", "child", "boy", "girl", "baby", "kid", "player", "animal", "dog",
    "cat", "horse", "cow", "sheep", "bird", "elephant", "bear", "zebra", "giraffe", "fish", "deer", "goose",
    "mouse", "car", "bus", "truck", "train", "bicycle", "bike", "motorcycle", "airplane", "plane", "boat",
    "ship", "vehicle", "street", "road", "sign", "traffic", "building", "house", "room", "kitchen",
    "bathroom", "bedroom", "table", "chair", "sofa", "couch", "bed", "desk", "window", "door", "wall",
    "floor", "ceiling", "roof", "tree", "plant", "flower", "grass", "sky", "cloud", "sun", "moon", "water",
    "sea", "ocean", "river", "lake", "beach", "mountain", "hill", "field", "park", "city", "town", "food",
    "pizza", "sandwich", "cake", "fruit", "apple", "banana", "vegetable", "bottle", "cup", "glass", "plate",
    "bowl", "knife", "fork", "spoon", "phone", "computer", "laptop", "keyboard", "screen", "television",
    "tv", "book", "clock", "watch", "bag", "umbrella", "hat", "shirt", "jacket", "coat", "dress", "shoe",
    "pants", "jeans", "shorts", "clothes", "color", "colour", "number", "shape", "size", "name", "word",
    "text", "letter", "time", "year", "day", "night", "morning", "evening", "picture", "image", "photo",
    "photograph", "scene", "object", "item", "thing", "area", "region", "side", "top", "bottom", "front",
    "back", "middle", "center", "centre", "corner", "background", "foreground", "left", "right", "edge",
    "question", "answer", "option", "choice", "type", "kind", "brand", "logo", "sport", "game", "ball",
    "bat", "racket", "kite", "skateboard", "surfboard", "snow", "ski", "frisbee", "team", "uniform",
    "hand", "arm", "leg", "head", "face", "eye", "hair", "mouth", "nose", "ear", "finger", "foot", "tooth",
    "body", "wheel", "tire", "engine", "seat", "mirror", "box", "chart", "graph", "map", "diagram", "menu",
    "price", "label", "poster", "advertisement", "store", "shop", "restaurant", "market", "office",
    "school", "hospital", "church", "bridge", "tower", "station", "airport", "fence", "pole", "wire",
    "track", "platform", "sidewalk", "crosswalk", "intersection", "lane", "highway", "parking", "lot",
    "weather", "rain", "emotion", "mood", "expression", "material", "wood", "metal", "plastic", "stone",
    "brick", "paper", "fabric", "position", "location", "direction", "distance", "height", "width",
    "length", "weight", "age", "gender", "species", "count", "total", "amount", "quantity", "police",
    "child", "family", "group", "crowd", "cloth", "leaf", "life", "wife", "shelf", "wolf", "half", "loaf",
    "dish", "ox", "data", "news", "series", "scissors", "gas", "class", "event", "activity", "action",
    "purpose", "reason", "relationship", "character", "mask", "toy", "doll", "teddy", "vase", "lamp",
    "light", "candle", "pillow", "blanket", "towel", "sink", "toilet", "shower", "oven", "microwave",
    "refrigerator", "fridge", "counter", "cabinet", "drawer", "shelf", "bench", "statue", "fountain",
    "flag", "banner", "board", "painting", "frame", "camera", "remote", "cable", "bowl", "jar", "can",
    "package", "card", "ticket", "money", "coin", "key", "lock", "tool", "hammer", "gun", "sword",
    "helmet", "glove", "boot", "sock", "belt", "tie", "scarf", "necklace", "ring", "earring", "bracelet",
    "wristwatch", "vest", "skirt", "suit", "costume", "player", "driver", "rider", "pilot", "chef",
    "doctor", "nurse", "teacher", "student", "worker", "officer", "soldier", "audience", "vendor",
    "customer", "surface", "pattern", "style", "design", "feature", "detail", "part", "piece", "line",
    "row", "column", "cell", "value", "percentage", "percent", "degree", "temperature", "season",
    "winter", "summer", "spring", "autumn", "fall", "country", "state", "place", "world", "earth",
    "environment", "nature", "forest", "desert", "island", "sand", "rock", "ground", "dirt", "mud", "ice",
    "fire", "smoke", "shadow", "reflection", "ocean", "wave", "boardwalk", "dock", "harbor", "port",
};

constexpr const char* kAdjectives[] = {
    "red", "blue", "green", "yellow", "black", "white", "gray", "grey", "brown", "pink", "purple",
    "orange", "silver", "gold", "golden", "beige", "big", "small", "large", "little", "tall", "short",
    "long", "wide", "narrow", "high", "low", "old", "new", "young", "happy", "sad", "angry", "bright",
    "dark", "heavy", "empty", "full", "open", "closed", "clean", "dirty", "wet", "dry", "hot", "cold",
    "warm", "cool", "fast", "slow", "hard", "soft", "round", "square", "rectangular", "circular",
    "flat", "wooden", "metallic", "transparent", "visible", "hidden", "main", "different", "similar",
    "many", "much", "several", "multiple", "single", "double", "first", "second", "third", "last",
    "next", "correct", "wrong", "true", "false", "good", "bad", "beautiful", "ugly", "real", "fake",
    "natural", "artificial", "indoor", "outdoor", "sunny", "cloudy", "rainy", "snowy", "busy", "crowded",
    "quiet", "noisy", "modern", "ancient", "famous", "popular", "common", "rare", "possible", "likely",
    "primary", "central", "near", "nearest", "close", "far", "upper", "lower", "striped", "spotted",
    "colorful", "plain", "shiny", "fresh", "ripe", "raw", "cooked", "sweet", "sour", "tired", "calm",
    "safe", "dangerous", "strong", "weak", "thick", "thin", "fat", "curly", "straight", "pretty", "cute",
    "whole", "entire", "overall", "current", "visible", "specific", "particular", "appropriate",
    "important", "likely", "unusual", "normal", "male", "female", "adult", "elderly", "front", "rear",
    "outer", "inner", "daily", "electric", "digital", "wild", "domestic", "public", "private",
};

constexpr const char* kVerbs[] = {
    "be", "have", "do", "run", "walk", "sit", "stand", "hold", "wear", "eat", "drink", "play", "ride",
    "drive", "fly", "swim", "jump", "throw", "catch", "carry", "look", "see", "watch", "read", "write",
    "use", "make", "take", "give", "show", "point", "cross", "wait", "lie", "sleep", "cook", "cut", "talk",
    "smile", "laugh", "cry", "close", "hang", "grow", "move", "turn", "stop", "go", "come", "leave",
    "enter", "climb", "push", "pull", "kick", "hit", "describe", "identify", "locate", "find", "tell",
    "select", "choose", "determine", "depict", "appear", "contain", "represent", "happen", "belong",
    "seem", "say", "think", "know", "feel", "keep", "begin", "speak", "break", "meet", "pay", "send",
    "spend", "stick", "strike", "teach", "win", "die", "tie", "buy", "bring", "build", "fall", "lean",
    "rest", "serve", "skate", "surf", "ski", "dance", "sing", "paint", "draw", "wash", "clean", "fix",
    "repair", "sell", "shop", "travel", "visit", "work", "study", "learn", "fight", "chase", "follow",
    "lead", "feed", "graze", "bite", "lick", "sniff", "bark", "land", "park", "board", "ship", "load",
    "unload", "cover", "fill", "pour", "serve", "celebrate", "compete", "perform", "pose", "face",
    "indicate", "suggest", "exceed", "precede", "proceed", "succeed", "mean", "refer", "infer", "explain", "compare", "measure", "estimate",
    "happen", "occur", "place", "put", "set", "lay", "stay", "live", "own", "need", "want", "like",
    "love", "hate", "prefer", "try", "help", "ask", "answer", "call", "check", "count", "label",
};

constexpr const char* kOther[] = {
    "please", "maybe", "perhaps", "probably", "currently", "also", "yes", "whose", "could", "would",
    "might", "may", "must", "shall", "etc", "one", "two", "three", "four", "five", "six", "seven",
    "eight", "nine", "ten", "zero", "hundred", "thousand", "million", "either", "neither", "whether",
    "however", "therefore", "although", "though", "unless", "since", "within", "without", "among",
    "across", "along", "around", "behind", "beside", "besides", "beneath", "near", "toward", "towards",
    "upon", "via", "per", "onto", "inside", "outside", "together", "already", "still", "yet", "even",
    "ever", "never", "always", "often", "sometimes", "usually", "really", "quite", "rather", "almost",
    "exactly", "directly", "clearly", "mostly", "mainly", "approximately", "roughly", "else",
};

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    lines.push_back(line.substr(first, last - first + 1));
  }
  return lines;
}

std::optional<PartOfSpeech> parse_pos(const std::string& tag) {
  if (tag == "NOUN") return PartOfSpeech::Noun;
  if (tag == "ADJ") return PartOfSpeech::Adj;
  if (tag == "VERB") return PartOfSpeech::Verb;
  if (tag == "OTHER") return PartOfSpeech::Other;
  return std::nullopt;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// "runn" -> "run"; l, s and z are left alone ("fill", "pass", "buzz").
std::optional<std::string> undouble(const std::string& stem) {
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    return stem.substr(0, n - 1);
  }
  return std::nullopt;
}

// consonant-vowel-consonant ending of a short stem, e.g. "mak", "rid", "us" is excluded.
bool short_cvc(const std::string& stem) {
  const std::size_t n = stem.size();
  if (n < 3 || n > 4) return false;
  const char last = stem[n - 1];
  return !is_vowel(last) && last != 'w' && last != 'x' && last != 'y' && is_vowel(stem[n - 2]) &&
         !is_vowel(stem[n - 3]);
}

}  // namespace

const Lexicon& Lexicon::builtin() {
  static const Lexicon lexicon = [] {
    Lexicon lx;
    for (const char* w : kStopWords) lx.stop_words_.insert(w);
    for (const auto& [word, lemma] : kIrregularLemmas) lx.exceptions_.emplace(word, lemma);
    // Later tables do not overwrite earlier ones, so list order encodes precedence.
    for (const char* w : kNouns) lx.pos_.emplace(w, PartOfSpeech::Noun);
    for (const char* w : kAdjectives) lx.pos_.emplace(w, PartOfSpeech::Adj);
    for (const char* w : kVerbs) lx.pos_.emplace(w, PartOfSpeech::Verb);
    for (const char* w : kOther) lx.pos_.emplace(w, PartOfSpeech::Other);
    return lx;
  }();
  return lexicon;
}

Lexicon Lexicon::with_overrides(const std::optional<std::filesystem::path>& stop_words,
                                const std::optional<std::filesystem::path>& lemmas,
                                const std::optional<std::filesystem::path>& pos) {
  Lexicon lx = builtin();
  if (stop_words) {
    lx.stop_words_.clear();
    for (const auto& w : read_lines(*stop_words)) lx.stop_words_.insert(w);
  }
  if (lemmas) {
    lx.exceptions_.clear();
    for (const auto& line : read_lines(*lemmas)) {
      std::istringstream fields(line);
      std::string word, lemma;
      if (!(fields >> word >> lemma)) throw ConfigError("malformed lemma line '" + line + "' in " + lemmas->string());
      lx.exceptions_[word] = lemma;
    }
  }
  if (pos) {
    lx.pos_.clear();
    for (const auto& line : read_lines(*pos)) {
      std::istringstream fields(line);
      std::string word, tag;
      if (!(fields >> word >> tag) || !parse_pos(tag)) {
        throw ConfigError("malformed POS line '" + line + "' in " + pos->string());
      }
      lx.pos_[word] = *parse_pos(tag);
    }
  }
  return lx;
}

bool Lexicon::is_stop_word(std::string_view word) const { return stop_words_.contains(std::string(word)); }

std::string Lexicon::lemmatize(std::string_view word_view) const {
  const std::string word(word_view);
  if (auto it = exceptions_.find(word); it != exceptions_.end()) return it->second;
  if (known(word)) return word;

  // Candidate base forms, most specific rule first; the first one the lexicon knows wins.
  std::vector<std::string> candidates;
  std::vector<std::string> comparative;  // only accepted when the base is an adjective
  auto strip = [&](std::size_t n) { return word.substr(0, word.size() - n); };
  if (ends_with(word, "ies") && word.size() > 4) candidates.push_back(strip(3) + "y");
  if (ends_with(word, "ves")) {
    candidates.push_back(strip(3) + "f");
    candidates.push_back(strip(3) + "fe");
  }
  if (ends_with(word, "es")) candidates.push_back(strip(2));
  if (ends_with(word, "s") && !ends_with(word, "ss")) candidates.push_back(strip(1));
  for (std::string_view suffix : {"ing", "ed", "est", "er"}) {
    if (!ends_with(word, suffix) || word.size() <= suffix.size() + 1) continue;
    auto& into = (suffix == "est" || suffix == "er") ? comparative : candidates;
    const std::string stem = strip(suffix.size());
    if (suffix != "ing" && ends_with(stem, "i")) into.push_back(stem.substr(0, stem.size() - 1) + "y");
    if (auto u = undouble(stem)) into.push_back(*u);
    into.push_back(stem);
    into.push_back(stem + "e");
  }
  for (const auto& c : candidates) {
    if (known(c)) return c;
  }
  for (const auto& c : comparative) {
    if (auto it = pos_.find(c); it != pos_.end() && it->second == PartOfSpeech::Adj) return c;
  }

  // Nothing in the lexicon: plain suffix heuristics.
  if (ends_with(word, "ies") && word.size() > 4) return strip(3) + "y";
  if (ends_with(word, "sses")) return strip(2);
  if (ends_with(word, "s") && word.size() > 3 && !ends_with(word, "ss") && !ends_with(word, "us") &&
      !ends_with(word, "is")) {
    return strip(1);
  }
  for (std::string_view suffix : {"ing", "ed"}) {
    if (!ends_with(word, suffix) || word.size() < suffix.size() + 3) continue;
    const std::string stem = strip(suffix.size());
    if (suffix == "ed" && ends_with(stem, "e")) continue;  // exceed, proceed, need
    if (auto u = undouble(stem)) return *u;
    if (short_cvc(stem)) return stem + "e";
    return stem;
  }
  return word;
}

PartOfSpeech Lexicon::tag(std::string_view lemma, std::string_view surface) const {
  if (auto it = pos_.find(std::string(lemma)); it != pos_.end()) return it->second;
  if (auto it = pos_.find(std::string(surface)); it != pos_.end()) return it->second;
  if (!surface.empty() && std::all_of(surface.begin(), surface.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return PartOfSpeech::Other;
  }
  if (ends_with(surface, "ing") || ends_with(surface, "ed")) return PartOfSpeech::Verb;
  if (ends_with(surface, "ly")) return PartOfSpeech::Other;
  for (std::string_view s : {"ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish", "ary", "y"}) {
    if (ends_with(lemma, s) && lemma.size() > s.size() + 2) return PartOfSpeech::Adj;
  }
  return PartOfSpeech::Noun;
}

}  // namespace semfilter
