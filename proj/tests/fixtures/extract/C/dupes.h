#pragma once
#include <vector>
#include "a.h"
#define INCLUDE_X 1
#include <vector>
#import <objc.h>
