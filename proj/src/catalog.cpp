#include "sgim/data/catalog.h"

namespace sgim::data {

const std::vector<ClassInfo>& class_catalog() {
  static const std::vector<ClassInfo> catalog = {
      {"whistle",
       {"a person whistling a tune", "someone whistles a high melody", "a clear whistling sound"},
       "whistling"},
      {"piano",
       {"someone playing the piano", "piano keys being struck", "a soft piano melody"},
       "piano playing"},
      {"rain",
       {"heavy rain falling", "rain drops on the roof", "steady rain pouring down"},
       "rain"},
      {"siren",
       {"an ambulance siren wailing", "a police siren in the street", "a siren blaring loudly"},
       "siren"},
      {"thunder",
       {"loud thunder rumbling", "a thunderstorm with deep thunder", "distant thunder roaring"},
       "thunder"},
      {"clock",
       {"a clock ticking", "the steady ticking of a clock", "an old clock tick tock"},
       "clock ticking"},
      {"bell",
       {"a church bell ringing", "bells chiming in the tower", "a bell ringing out"},
       "bell ringing"},
      {"wind",
       {"strong wind blowing", "wind howling outside", "a cold gust of wind"},
       "wind blowing"},
  };
  return catalog;
}

std::string_view default_synonym_table() {
  return R"(# word: synonyms
whistling: whistle, piping
whistles: pipes
whistle: pipe
tune: melody, song
melody: tune, air
high: shrill
clear: bright
sound: noise
playing: performing
piano: keyboard, pianoforte
keys: notes
struck: hit
soft: gentle, quiet
heavy: intense, hard
rain: rainfall, shower
falling: dropping
drops: droplets
roof: rooftop
steady: constant
pouring: streaming
ambulance: paramedic
siren: alarm
wailing: howling, crying
police: cops
street: road
blaring: blasting
loudly: noisily
loud: noisy, booming
thunder: thunderclap
rumbling: roaring, growling
thunderstorm: storm
deep: low
distant: faraway
roaring: booming
clock: timepiece
ticking: clicking
tick: click
tock: clack
old: antique
church: chapel
bell: chime
ringing: chiming, tolling
bells: chimes
chiming: ringing
tower: belfry
strong: powerful
wind: breeze, gale
blowing: gusting
howling: wailing
outside: outdoors
cold: chilly
gust: blast
)";
}

}  // namespace sgim::data
