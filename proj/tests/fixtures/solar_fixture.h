// Generated by tests/oracles/gen_solar_fixture.py -- do not edit by hand.
#pragma once
#include <cstdint>

struct SolarSunsetCase {
  const char* name;
  double lat, lon;
  int year, month, day;
  bool has_sunset;
  std::int64_t sunset_unix;  // seconds, UTC
};

struct SolarElevationCase {
  const char* name;
  double lat, lon;
  std::int64_t when_unix;
  double elevation_deg;
};

inline constexpr SolarSunsetCase kSolarSunsetCases[] = {
    {"tokyo", 35.6762, 139.6503, 2014, 9, 1, true, 1409562571},  // 2014-09-01T09:09:31.331696+00:00
    {"tokyo", 35.6762, 139.6503, 2014, 9, 8, true, 1410166776},  // 2014-09-08T08:59:36.465288+00:00
    {"tokyo", 35.6762, 139.6503, 2014, 9, 15, true, 1410770965},  // 2014-09-15T08:49:25.714397+00:00
    {"tokyo", 35.6762, 139.6503, 2014, 9, 22, true, 1411375148},  // 2014-09-22T08:39:08.681884+00:00
    {"tokyo", 35.6762, 139.6503, 2014, 9, 24, true, 1411547772},  // 2014-09-24T08:36:12.586168+00:00
    {"tokyo", 35.6762, 139.6503, 2014, 9, 30, true, 1412065648},  // 2014-09-30T08:27:28.271714+00:00
    {"tokyo", 35.6762, 139.6503, 2014, 12, 21, true, 1419147092},  // 2014-12-21T07:31:32.040586+00:00
    {"tokyo", 35.6762, 139.6503, 2014, 6, 21, true, 1403344824},  // 2014-06-21T10:00:24.245352+00:00
    {"london", 51.5074, -0.1278, 2014, 3, 20, true, 1395339202},  // 2014-03-20T18:13:22.439234+00:00
    {"london", 51.5074, -0.1278, 2020, 7, 4, true, 1593893967},  // 2020-07-04T20:19:27.106749+00:00
    {"sydney", -33.8688, 151.2093, 2014, 9, 24, true, 1411545154},  // 2014-09-24T07:52:34.736535+00:00
    {"sydney", -33.8688, 151.2093, 2018, 1, 15, true, 1516007341},  // 2018-01-15T09:09:01.391245+00:00
    {"quito", -0.1807, -78.4678, 2014, 3, 20, true, 1395357871},  // 2014-03-20T23:24:31.787872+00:00
    {"quito", -0.1807, -78.4678, 2014, 9, 23, true, 1411513767},  // 2014-09-23T23:09:27.432896+00:00
    {"reykjavik", 64.1466, -21.9426, 2014, 12, 21, true, 1419175767},  // 2014-12-21T15:29:27.115765+00:00
    {"reykjavik", 64.1466, -21.9426, 2015, 3, 1, true, 1425235504},  // 2015-03-01T18:45:04.952351+00:00
    {"capetown", -33.9249, 18.4241, 2014, 9, 24, true, 1411577038},  // 2014-09-24T16:43:58.995993+00:00
    {"anchorage", 61.2181, -149.9003, 2016, 10, 10, true, 1476154840},  // 2016-10-11T03:00:40.158882+00:00
    {"singapore", 1.3521, 103.8198, 2014, 9, 24, true, 1411556404},  // 2014-09-24T11:00:04.882113+00:00
    {"singapore", 1.3521, 103.8198, 2021, 12, 31, true, 1640948946},  // 2021-12-31T11:09:06.818787+00:00
    {"polar_day", 89.9, 0.0, 2014, 6, 21, false, 0},
    {"polar_night", 89.9, 0.0, 2014, 12, 21, false, 0},
};

inline constexpr SolarElevationCase kSolarElevationCases[] = {
    {"tokyo", 35.6762, 139.6503, 1409540400, 62.33776125586998},  // 2014-09-01T03:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1409563800, -4.89995133508134},  // 2014-09-01T09:30:00+00:00
    {"tokyo", 35.6762, 139.6503, 1409583600, -45.949402301121495},  // 2014-09-01T15:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1409607900, 17.600960289436543},  // 2014-09-01T21:45:00+00:00
    {"tokyo", 35.6762, 139.6503, 1410145200, 59.69813460205167},  // 2014-09-08T03:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1410168600, -6.919374197627292},  // 2014-09-08T09:30:00+00:00
    {"tokyo", 35.6762, 139.6503, 1410188400, -48.46699201743283},  // 2014-09-08T15:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1410212700, 16.573391691867016},  // 2014-09-08T21:45:00+00:00
    {"tokyo", 35.6762, 139.6503, 1410750000, 56.97438259918684},  // 2014-09-15T03:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1410773400, -9.010656188493599},  // 2014-09-15T09:30:00+00:00
    {"tokyo", 35.6762, 139.6503, 1410793200, -51.03962042791525},  // 2014-09-15T15:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1410817500, 15.5016315696664},  // 2014-09-15T21:45:00+00:00
    {"tokyo", 35.6762, 139.6503, 1411354800, 54.20149735778066},  // 2014-09-22T03:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1411378200, -11.12947499174254},  // 2014-09-22T09:30:00+00:00
    {"tokyo", 35.6762, 139.6503, 1411398000, -53.634636459798486},  // 2014-09-22T15:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1411422300, 14.380628972505889},  // 2014-09-22T21:45:00+00:00
    {"tokyo", 35.6762, 139.6503, 1411527600, 53.40526760478128},  // 2014-09-24T03:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1411551000, -11.73345185566049},  // 2014-09-24T09:30:00+00:00
    {"tokyo", 35.6762, 139.6503, 1411570800, -54.37573021331224},  // 2014-09-24T15:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1411595100, 14.050701118183568},  // 2014-09-24T21:45:00+00:00
    {"tokyo", 35.6762, 139.6503, 1412046000, 51.01895768613951},  // 2014-09-30T03:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1412069400, -13.525081522909872},  // 2014-09-30T09:30:00+00:00
    {"tokyo", 35.6762, 139.6503, 1412089200, -56.58736164246267},  // 2014-09-30T15:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1412113500, 13.034201471937962},  // 2014-09-30T21:45:00+00:00
    {"tokyo", 35.6762, 139.6503, 1419130800, 30.688467160023137},  // 2014-12-21T03:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1419154200, -23.27428241309275},  // 2014-12-21T09:30:00+00:00
    {"tokyo", 35.6762, 139.6503, 1419174000, -76.97909051313178},  // 2014-12-21T15:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1419198300, -1.278950855666622},  // 2014-12-21T21:45:00+00:00
    {"tokyo", 35.6762, 139.6503, 1403319600, 77.22232312738096},  // 2014-06-21T03:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1403343000, 4.626050429357363},  // 2014-06-21T09:30:00+00:00
    {"tokyo", 35.6762, 139.6503, 1403362800, -30.755301381089197},  // 2014-06-21T15:00:00+00:00
    {"tokyo", 35.6762, 139.6503, 1403387100, 25.486213337806404},  // 2014-06-21T21:45:00+00:00
    {"london", 51.5074, -0.1278, 1395284400, -27.288820276250533},  // 2014-03-20T03:00:00+00:00
    {"london", 51.5074, -0.1278, 1395307800, 28.594346205213547},  // 2014-03-20T09:30:00+00:00
    {"london", 51.5074, -0.1278, 1395327600, 27.04511380610807},  // 2014-03-20T15:00:00+00:00
    {"london", 51.5074, -0.1278, 1395351900, -30.281291045592752},  // 2014-03-20T21:45:00+00:00
    {"london", 51.5074, -0.1278, 1593831600, -6.344713140474596},  // 2020-07-04T03:00:00+00:00
    {"london", 51.5074, -0.1278, 1593855000, 48.66791253015535},  // 2020-07-04T09:30:00+00:00
    {"london", 51.5074, -0.1278, 1593874800, 45.874664992263476},  // 2020-07-04T15:00:00+00:00
    {"london", 51.5074, -0.1278, 1593899100, -9.61847802392316},  // 2020-07-04T21:45:00+00:00
    {"sydney", -33.8688, 151.2093, 1411527600, 52.448193953658325},  // 2014-09-24T03:00:00+00:00
    {"sydney", -33.8688, 151.2093, 1411551000, -20.791270212306955},  // 2014-09-24T09:30:00+00:00
    {"sydney", -33.8688, 151.2093, 1411570800, -51.53175077108247},  // 2014-09-24T15:00:00+00:00
    {"sydney", -33.8688, 151.2093, 1411595100, 24.544366388557464},  // 2014-09-24T21:45:00+00:00
    {"sydney", -33.8688, 151.2093, 1515985200, 72.32501519861236},  // 2018-01-15T03:00:00+00:00
    {"sydney", -33.8688, 151.2093, 1516008600, -4.6845238108323315},  // 2018-01-15T09:30:00+00:00
    {"sydney", -33.8688, 151.2093, 1516028400, -33.51581224135872},  // 2018-01-15T15:00:00+00:00
    {"sydney", -33.8688, 151.2093, 1516052700, 31.885181633834108},  // 2018-01-15T21:45:00+00:00
    {"quito", -0.1807, -78.4678, 1395284400, -54.634948588470536},  // 2014-03-20T03:00:00+00:00
    {"quito", -0.1807, -78.4678, 1395307800, -27.842106125543552},  // 2014-03-20T09:30:00+00:00
    {"quito", -0.1807, -78.4678, 1395327600, 54.673967795603794},  // 2014-03-20T15:00:00+00:00
    {"quito", -0.1807, -78.4678, 1395351900, 24.054484821239242},  // 2014-03-20T21:45:00+00:00
    {"quito", -0.1807, -78.4678, 1411441200, -58.39560548890887},  // 2014-09-23T03:00:00+00:00
    {"quito", -0.1807, -78.4678, 1411464600, -24.07952086715909},  // 2014-09-23T09:30:00+00:00
    {"quito", -0.1807, -78.4678, 1411484400, 58.440182686793676},  // 2014-09-23T15:00:00+00:00
    {"quito", -0.1807, -78.4678, 1411508700, 20.28598914836833},  // 2014-09-23T21:45:00+00:00
    {"reykjavik", 64.1466, -21.9426, 1419130800, -46.430352866090146},  // 2014-12-21T03:00:00+00:00
    {"reykjavik", 64.1466, -21.9426, 1419154200, -8.71290334226201},  // 2014-12-21T09:30:00+00:00
    {"reykjavik", 64.1466, -21.9426, 1419174000, 0.512609032749495},  // 2014-12-21T15:00:00+00:00
    {"reykjavik", 64.1466, -21.9426, 1419198300, -35.8674081189522},  // 2014-12-21T21:45:00+00:00
    {"reykjavik", 64.1466, -21.9426, 1425178800, -31.830794719059185},  // 2015-03-01T03:00:00+00:00
    {"reykjavik", 64.1466, -21.9426, 1425202200, 4.567766220482071},  // 2015-03-01T09:30:00+00:00
    {"reykjavik", 64.1466, -21.9426, 1425222000, 16.74040097690761},  // 2015-03-01T15:00:00+00:00
    {"reykjavik", 64.1466, -21.9426, 1425246300, -19.92481378303465},  // 2015-03-01T21:45:00+00:00
    {"capetown", -33.9249, 18.4241, 1411527600, -19.9899809799345},  // 2014-09-24T03:00:00+00:00
    {"capetown", -33.9249, 18.4241, 1411551000, 52.93528991773166},  // 2014-09-24T09:30:00+00:00
    {"capetown", -33.9249, 18.4241, 1411570800, 20.543258154097316},  // 2014-09-24T15:00:00+00:00
    {"capetown", -33.9249, 18.4241, 1411595100, -53.18710967149653},  // 2014-09-24T21:45:00+00:00
    {"anchorage", 61.2181, -149.9003, 1476068400, -0.39105895041630845},  // 2016-10-10T03:00:00+00:00
    {"anchorage", 61.2181, -149.9003, 1476091800, -35.567415571603064},  // 2016-10-10T09:30:00+00:00
    {"anchorage", 61.2181, -149.9003, 1476111600, -11.67679935426041},  // 2016-10-10T15:00:00+00:00
    {"anchorage", 61.2181, -149.9003, 1476135900, 21.715972884352325},  // 2016-10-10T21:45:00+00:00
    {"singapore", 1.3521, 103.8198, 1411527600, 60.72121731040668},  // 2014-09-24T03:00:00+00:00
    {"singapore", 1.3521, 103.8198, 1411551000, 21.68497645311912},  // 2014-09-24T09:30:00+00:00
    {"singapore", 1.3521, 103.8198, 1411570800, -60.80961608490543},  // 2014-09-24T15:00:00+00:00
    {"singapore", 1.3521, 103.8198, 1411595100, -17.92138994347377},  // 2014-09-24T21:45:00+00:00
    {"singapore", 1.3521, 103.8198, 1640919600, 50.48306116860071},  // 2021-12-31T03:00:00+00:00
    {"singapore", 1.3521, 103.8198, 1640943000, 21.79677392558561},  // 2021-12-31T09:30:00+00:00
    {"singapore", 1.3521, 103.8198, 1640962800, -52.152188107752835},  // 2021-12-31T15:00:00+00:00
    {"singapore", 1.3521, 103.8198, 1640987100, -19.58552404797682},  // 2021-12-31T21:45:00+00:00
};

// Tokyo sunsets for September 2014, seconds UTC, index = day-of-month - 1.
inline constexpr std::int64_t kTokyoSep2014SunsetUnix[30] = {
    1409562571, 1409648887, 1409735203, 1409821518, 1409907833, 1409994148,
    1410080462, 1410166776, 1410253089, 1410339403, 1410425716, 1410512028,
    1410598341, 1410684653, 1410770965, 1410857277, 1410943589, 1411029901,
    1411116213, 1411202525, 1411288836, 1411375148, 1411461460, 1411547772,
    1411634084, 1411720396, 1411806709, 1411893022, 1411979335, 1412065648,
};

